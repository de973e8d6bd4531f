#pragma once

#include "rpcsde/models.hpp"
#include "rpcsde/pce.hpp"
#include "rpcsde/run_record.hpp"

namespace rpcsde {

struct MrpcConfig {
    int L = 2;           // basis degree
    int S = 2;           // interaction degree
    double h = 0.01;     // time step
    double T = 1.0;      // final time
    TensorMode mode = TensorMode::Sparse;
    double pivot_floor = 1e-10;
    int record_every = 1;
    // Guard moments carried above the closure order.  Top-order updates lean
    // on projected estimates whose O(1)-relative errors otherwise sit right
    // next to the orders feeding the Hankel matrix; each guard order moves
    // that boundary one level further out.
    int guard_orders = 0;

    // Moment order carried by the recursion: 2L+S (sparse) or 3L (full).
    int moment_order() const {
        return (mode == TensorMode::Full ? 3 * L : 2 * L + S) + guard_orders;
    }
    void validate() const;
};

struct MrpcDiagnostics {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double ortho_residual = 0.0;
};

struct MrpcState {
    long step = 0;
    MomentTable moments;
    MrpcDiagnostics diag;

    MrpcState(int dimension, int order) : moments(dimension, order) {}
};

// Degree feasibility for the first-order update: deg p_b <= S+1 and
// deg Sigma^{(i,l)} <= S+2 keep every expectation inside the evaluation
// domain J+S.  Returns false when the stricter working bound
// max{deg p_b, 2 deg p_sigma} <= S is violated (run proceeds; accuracy may
// degrade), throws degree_error when the hard bound fails.
bool check_model_degrees(const ModelSpec& model, int S);

// Moments of x + delta from moments of x (exact binomial transform).
MomentTable moment_shift(const MomentTable& m, const std::vector<double>& delta);
// p(x + delta) as a polynomial in x.
MvPoly poly_shift(const MvPoly& p, const std::vector<double>& delta);
// Moments of (scale o x) / p(scale o x): exact diagonal rescaling.
MomentTable moment_scale(const MomentTable& m, const std::vector<double>& scale);
MvPoly poly_scale(const MvPoly& p, const std::vector<double>& scale);

// The per-step expectation calculus.  All polynomial chaos arithmetic runs on
// the standardized state y = (x - mean) / sd: monomial Hankel matrices of
// off-center or badly scaled laws are catastrophically conditioned, and the
// recursion beyond the table order needs O(1) moment magnitudes.  Both
// transforms are exact on moments and coefficient polynomials; the
// orthonormal basis is the same polynomial family in moved coordinates.
struct MrpcCalculus {
    std::vector<double> mean;
    std::vector<double> sd;
    MomentTable standardized;
    OrthonormalBasis basis;
    TripleTensor tensor;
    PceEngine engine;

    MrpcCalculus(const MomentTable& raw, const MrpcConfig& cfg);
    MrpcCalculus(const MrpcCalculus&) = delete;
    MrpcCalculus& operator=(const MrpcCalculus&) = delete;

    // E[x^gamma] in the original (raw) coordinates through the standardized engine.
    double expect_raw_monomial(const MultiIndex& gamma) const;

    // E[x^mu q(x)]: the coefficient polynomial is represented under the basis
    // and contracted against the projected representation of x^mu whenever its
    // degree allows (the working route); otherwise evaluated monomial by
    // monomial through the recursion.
    double expect_raw_times(const MultiIndex& mu, const MvPoly& q_raw) const;
    // E[x^mu qa(x) qb(x)] without ever forming a product above the basis
    // degree: the pair is contracted through the triple products.
    double expect_raw_times_pair(const MultiIndex& mu, const MvPoly& qa_raw,
                                 const MvPoly& qb_raw) const;

    // Factor expansions for a covariance above the basis degree: one
    // (sigma_i, sigma_l) expansion pair per noise channel.
    using PairExpansions =
        std::vector<std::pair<const std::vector<double>*, const std::vector<double>*>>;

    // E[y^beta q(y)] in standardized coordinates with per-term dispatch:
    // symbolic while |beta| + deg q stays inside the moment table (exact),
    // then the coefficient inner product <repr(y^beta), q> when deg q <= L
    // (exact up to |beta| <= L+S), then the sigma-pair contraction, and only
    // as a last resort the beyond-table monomial recursion.
    double expect_std_product(const MultiIndex& beta, const MvPoly& q,
                              const std::vector<double>* q_exp,
                              const PairExpansions* pairs) const;
    double expect_std_pair(const MultiIndex& beta, const std::vector<double>& wa,
                           const std::vector<double>& wb) const;
};

MrpcState mrpc_init(const ModelSpec& model, const MrpcConfig& cfg);

// One first-order moment update built on the step-k basis and triple products.
MrpcState mrpc_step(const MrpcState& state, const ModelSpec& model, const MrpcConfig& cfg);

// Full horizon run; aborts with partial records (status 3) on a singular Hankel.
RunResult mrpc_run(const ModelSpec& model, const MrpcConfig& cfg);

}  // namespace rpcsde
