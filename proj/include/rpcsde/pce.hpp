#pragma once

#include <optional>
#include <vector>

#include "rpcsde/orthopoly.hpp"

namespace rpcsde {

// Coefficients of a random variable in the step-k orthonormal basis,
// indexed by the graded basis of degree L.  `bound` is the declared degree
// bound of the represented polynomial (entries above it are zero).
struct PceCoeffs {
    std::vector<double> c;
    int bound = 0;
};

int support_degree(const std::vector<double>& c, const GradedBasis& gb, double eps = 1e-14);

// Exact expansion of a polynomial with deg <= L.
PceCoeffs pce_expand_poly(const OrthonormalBasis& basis, const MvPoly& p);

// E[w1 w2] via orthonormality.
double pce_expectation(const PceCoeffs& w1, const PceCoeffs& w2);

// E[w1 w2 w3] = sum Gamma_{abc} w1_a w2_b w3_c; requires the support degrees
// to fit inside the restricted set.
double pce_expectation(const TripleTensor& t, const PceCoeffs& w1, const PceCoeffs& w2,
                       const PceCoeffs& w3);

// Sparse projection Pi_{k,L}(w1 w2) with deg(w1) <= S, deg(w2) <= L.
PceCoeffs pce_project_product(const TripleTensor& t, const PceCoeffs& w1, const PceCoeffs& w2);

// Recursive evaluator for monomial expectations in the truncated polynomial
// chaos calculus of one time step.  With a moment table (mRPC), orders up to
// the table order J are read directly and orders in (J, J+S] are evaluated by
// the greedy split + projection recursion; without a table (pRPC), the same
// recursion runs on top of the basis/tensor alone.
class PceEngine {
  public:
    PceEngine(const OrthonormalBasis& basis, const TripleTensor& tensor,
              const MomentTable* table = nullptr);

    int max_order() const { return domain_.max_order(); }
    const GradedBasis& domain() const { return domain_; }
    const OrthonormalBasis& basis() const { return basis_; }
    const TripleTensor& tensor() const { return tensor_; }

    // E[x^gamma]; throws degree_error beyond the J + S domain.
    double expect_monomial(const MultiIndex& gamma) const;
    // Same, bypassing the moment-table shortcut (exactness checks, pRPC).
    double expect_monomial_recursive(const MultiIndex& gamma) const;

    // E[q(x)] by linearity over the monomial terms of q.
    double expect_poly(const MvPoly& q) const;

    // Degree-<=L representation of x^mu via chunked projections (memoized).
    const std::vector<double>& repr(const MultiIndex& mu) const;

  private:
    double eval(const MultiIndex& gamma, bool use_table) const;

    const OrthonormalBasis& basis_;
    const TripleTensor& tensor_;
    const MomentTable* table_;
    int chunk_;
    GradedBasis domain_;
    mutable std::vector<std::optional<std::vector<double>>> repr_cache_;
    mutable std::vector<std::optional<double>> expect_cache_;
};

}  // namespace rpcsde
