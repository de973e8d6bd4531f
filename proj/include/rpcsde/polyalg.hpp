#pragma once

#include <map>
#include <vector>

#include "rpcsde/multiindex.hpp"

namespace rpcsde {

// Multivariate polynomial in the monomial basis.  Coefficients below
// kCoeffEps are dropped so the representation stays canonical; the zero
// polynomial has an empty term map and degree() reports -1.
class MvPoly {
  public:
    static constexpr double kCoeffEps = 1e-15;

    explicit MvPoly(int dimension) : d_(dimension) {}
    MvPoly(int dimension, std::map<MultiIndex, double> terms);

    static MvPoly constant(int dimension, double value);
    static MvPoly monomial(int dimension, const MultiIndex& alpha, double coeff = 1.0);

    int dimension() const { return d_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;  // -1 for the zero polynomial
    const std::map<MultiIndex, double>& terms() const { return terms_; }

    double coeff(const MultiIndex& alpha) const;
    void add_term(const MultiIndex& alpha, double coeff);

    MvPoly operator+(const MvPoly& rhs) const;
    MvPoly operator-(const MvPoly& rhs) const;
    MvPoly operator*(double scale) const;

  private:
    int d_;
    std::map<MultiIndex, double> terms_;
};

MvPoly poly_mul(const MvPoly& p, const MvPoly& q);
// Partial derivative with respect to coordinate i (1-based per convention here: 0..d-1).
MvPoly poly_diff(const MvPoly& p, int coordinate);
double poly_eval(const MvPoly& p, const std::vector<double>& x);
// Embed into a higher dimension, keeping exponents on the leading coordinates.
MvPoly poly_lift(const MvPoly& p, int new_dimension);

// E[z^n] for z ~ N(0, 1): 0 for odd n, (n-1)!! for even n.
double gaussian_increment_moment(int n);

// Product law of d independent scalar components.
struct GaussianComponent {
    double mean;
    double variance;
};
struct UniformComponent {
    double lower;
    double upper;
};
struct ConstantComponent {
    double value;
};

struct DistComponent {
    enum class Kind { Gaussian, Uniform, Constant } kind;
    double a = 0.0;  // mean / lower / value
    double b = 0.0;  // variance / upper / unused

    static DistComponent gaussian(double mean, double variance);
    static DistComponent uniform(double lower, double upper);
    static DistComponent constant(double value);

    double mean() const;
    double variance() const;
    // E[X^n] via the closed-form 1D recurrences.
    double raw_moment(int n) const;
};

struct InitialDistribution {
    std::vector<DistComponent> components;
    int dimension() const { return static_cast<int>(components.size()); }
};

// Forward declaration; full definition lives in orthopoly.hpp.
class MomentTable;

// All moments m_gamma = prod_i E[X_i^gamma_i] for |gamma| <= max_order.
MomentTable initial_moments(const InitialDistribution& dist, int max_order);

}  // namespace rpcsde
