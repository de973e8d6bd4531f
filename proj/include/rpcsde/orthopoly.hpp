#pragma once

#include <vector>

#include "rpcsde/multiindex.hpp"
#include "rpcsde/polyalg.hpp"

namespace rpcsde {

// Dense table of moments m_gamma for |gamma| <= max_order, addressed through
// the graded basis.  m_0 is the probability normalization and must stay 1.
class MomentTable {
  public:
    MomentTable(int dimension, int max_order);

    int dimension() const { return basis_.dimension(); }
    int max_order() const { return basis_.max_order(); }
    const GradedBasis& basis() const { return basis_; }

    double at(std::size_t pos) const { return values_[pos]; }
    double& at(std::size_t pos) { return values_[pos]; }
    double get(const MultiIndex& gamma) const { return values_[basis_.position(gamma)]; }
    void set(const MultiIndex& gamma, double v) { values_[basis_.position(gamma)] = v; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

  private:
    GradedBasis basis_;
    std::vector<double> values_;
};

// Triangular change of basis between monomials and orthonormal polynomials:
// T_alpha(x) = sum_beta B[alpha][beta] x^beta with B lower triangular in the
// graded ordering and strictly positive diagonal.  Binv = B^{-1} expresses
// monomials in the T basis.
class OrthonormalBasis {
  public:
    OrthonormalBasis(int dimension, int degree);

    int dimension() const { return gb_.dimension(); }
    int degree() const { return gb_.max_order(); }
    std::size_t size() const { return gb_.size(); }
    const GradedBasis& graded() const { return gb_; }

    double b(std::size_t row, std::size_t col) const { return B_[row * size() + col]; }
    double binv(std::size_t row, std::size_t col) const { return Binv_[row * size() + col]; }
    std::vector<double>& b_data() { return B_; }
    std::vector<double>& binv_data() { return Binv_; }
    const std::vector<double>& b_data() const { return B_; }
    const std::vector<double>& binv_data() const { return Binv_; }

    // T_alpha as an explicit polynomial (monomial coefficients from row alpha of B).
    MvPoly row_poly(std::size_t alpha) const;

    // Expansion of a polynomial with degree <= L in the T basis: c = B^{-T} q.
    std::vector<double> expand(const MvPoly& p) const;

  private:
    GradedBasis gb_;
    std::vector<double> B_;
    std::vector<double> Binv_;
};

// Sparse-by-degree triple product tensor over the restricted index set
//   { (alpha,beta,gamma) : |alpha|,|beta|,|gamma| <= L, |a|+|b|+|g| <= total_cap }.
// Storage is a dense C_L^3 block; entries outside the set must never be read,
// and get() enforces that (closure audit).
class TripleTensor {
  public:
    TripleTensor(int dimension, int degree, int interaction, int total_cap);

    int degree() const { return L_; }
    int interaction() const { return S_; }
    int total_cap() const { return cap_; }
    const GradedBasis& graded() const { return gb_; }
    std::size_t side() const { return n_; }

    bool in_set(std::size_t a, std::size_t b, std::size_t c) const {
        return gb_.order_of(a) + gb_.order_of(b) + gb_.order_of(c) <= cap_;
    }
    double get(std::size_t a, std::size_t b, std::size_t c) const;
    void set(std::size_t a, std::size_t b, std::size_t c, double v) {
        values_[(a * n_ + b) * n_ + c] = v;
    }
    double raw(std::size_t a, std::size_t b, std::size_t c) const {
        return values_[(a * n_ + b) * n_ + c];
    }
    // Contiguous (b,c)-slice for a fixed first index.
    const double* slice(std::size_t a) const { return values_.data() + a * n_ * n_; }

    std::vector<double>& data() { return values_; }

  private:
    GradedBasis gb_;
    int L_, S_, cap_;
    std::size_t n_;
    std::vector<double> values_;
};

enum class TensorMode { Sparse, Full };

// H[alpha][beta] = m_{alpha+beta}; requires moments to order 2*degree.
std::vector<double> hankel_matrix(const MomentTable& m, int degree);

// Gram-Schmidt against the moment bilinear form, realized as Cholesky of the
// Hankel matrix: H = G G^T, B = G^{-1}, Binv = G.
OrthonormalBasis basis_from_moments(const MomentTable& m, int degree, double pivot_floor = 1e-10);

// Gamma_{abc} = sum_{mu,nu,eta} B_{a mu} B_{b nu} B_{c eta} m_{mu+nu+eta} over
// the restricted set (Sparse: total cap 2L+S; Full: 3L), assembled by staged
// contraction rather than the six-fold loop.
TripleTensor triple_products(const OrthonormalBasis& basis, const MomentTable& m, int interaction,
                             TensorMode mode = TensorMode::Sparse);

// Row of Binv: coefficients c with x^gamma = sum_alpha c_alpha T_alpha(x).
std::vector<double> monomial_in_basis(const OrthonormalBasis& basis, const MultiIndex& gamma);

// Extreme eigenvalues of the Hankel matrix (lambda_min may be negative).
std::pair<double, double> hankel_spectrum_bounds(const MomentTable& m, int degree);

// max |B H B^T - I| against the generating moments.
double orthonormality_residual(const OrthonormalBasis& basis, const MomentTable& m);

}  // namespace rpcsde
