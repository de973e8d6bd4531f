#include "rpcsde/polyalg.hpp"

#include <cmath>
#include <cstdlib>

#include "rpcsde/orthopoly.hpp"

namespace rpcsde {

MvPoly::MvPoly(int dimension, std::map<MultiIndex, double> terms) : d_(dimension) {
    for (auto& [alpha, c] : terms) add_term(alpha, c);
}

MvPoly MvPoly::constant(int dimension, double value) {
    MvPoly p(dimension);
    p.add_term(MultiIndex(dimension, 0), value);
    return p;
}

MvPoly MvPoly::monomial(int dimension, const MultiIndex& alpha, double coeff) {
    MvPoly p(dimension);
    p.add_term(alpha, coeff);
    return p;
}

int MvPoly::degree() const {
    int deg = -1;
    for (const auto& [alpha, c] : terms_) deg = std::max(deg, total_order(alpha));
    return deg;
}

double MvPoly::coeff(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
}

void MvPoly::add_term(const MultiIndex& alpha, double coeff) {
    if (static_cast<int>(alpha.size()) != d_)
        throw dimension_error("polynomial term dimension mismatch");
    for (int e : alpha)
        if (e < 0) throw std::invalid_argument("negative exponent in polynomial term");
    auto it = terms_.find(alpha);
    double v = (it == terms_.end() ? 0.0 : it->second) + coeff;
    if (std::abs(v) <= kCoeffEps) {
        if (it != terms_.end()) terms_.erase(it);
    } else if (it == terms_.end()) {
        terms_.emplace(alpha, v);
    } else {
        it->second = v;
    }
}

MvPoly MvPoly::operator+(const MvPoly& rhs) const {
    if (d_ != rhs.d_) throw dimension_error("polynomial dimension mismatch");
    MvPoly r = *this;
    for (const auto& [alpha, c] : rhs.terms_) r.add_term(alpha, c);
    return r;
}

MvPoly MvPoly::operator-(const MvPoly& rhs) const {
    if (d_ != rhs.d_) throw dimension_error("polynomial dimension mismatch");
    MvPoly r = *this;
    for (const auto& [alpha, c] : rhs.terms_) r.add_term(alpha, -c);
    return r;
}

MvPoly MvPoly::operator*(double scale) const {
    MvPoly r(d_);
    for (const auto& [alpha, c] : terms_) r.add_term(alpha, c * scale);
    return r;
}

MvPoly poly_mul(const MvPoly& p, const MvPoly& q) {
    if (p.dimension() != q.dimension()) throw dimension_error("polynomial dimension mismatch");
    MvPoly r(p.dimension());
    for (const auto& [a, ca] : p.terms())
        for (const auto& [b, cb] : q.terms()) r.add_term(mi_add(a, b), ca * cb);
    return r;
}

MvPoly poly_diff(const MvPoly& p, int coordinate) {
    if (coordinate < 0 || coordinate >= p.dimension())
        throw dimension_error("derivative coordinate out of range");
    MvPoly r(p.dimension());
    for (const auto& [a, c] : p.terms()) {
        if (a[coordinate] == 0) continue;
        MultiIndex b = a;
        b[coordinate] -= 1;
        r.add_term(b, c * a[coordinate]);
    }
    return r;
}

double poly_eval(const MvPoly& p, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != p.dimension())
        throw dimension_error("evaluation point dimension mismatch");
    double s = 0.0;
    for (const auto& [a, c] : p.terms()) {
        double m = c;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (int e = 0; e < a[i]; ++e) m *= x[i];
        s += m;
    }
    return s;
}

MvPoly poly_lift(const MvPoly& p, int new_dimension) {
    if (new_dimension < p.dimension()) throw dimension_error("cannot lift to a smaller dimension");
    MvPoly r(new_dimension);
    for (const auto& [a, c] : p.terms()) {
        MultiIndex b = a;
        b.resize(new_dimension, 0);
        r.add_term(b, c);
    }
    return r;
}

double gaussian_increment_moment(int n) {
    if (n < 0) throw std::invalid_argument("negative moment order");
    if (n % 2 == 1) return 0.0;
    double v = 1.0;
    for (int k = n - 1; k > 1; k -= 2) v *= k;
    return v;
}

DistComponent DistComponent::gaussian(double mean, double variance) {
    if (variance < 0) throw config_error("gaussian variance must be >= 0");
    return {Kind::Gaussian, mean, variance};
}
DistComponent DistComponent::uniform(double lower, double upper) {
    if (!(lower < upper)) throw config_error("uniform bounds must satisfy lower < upper");
    return {Kind::Uniform, lower, upper};
}
DistComponent DistComponent::constant(double value) {
    return {Kind::Constant, value, 0.0};
}

double DistComponent::mean() const {
    switch (kind) {
        case Kind::Gaussian: return a;
        case Kind::Uniform: return 0.5 * (a + b);
        case Kind::Constant: return a;
    }
    return 0.0;
}

double DistComponent::variance() const {
    switch (kind) {
        case Kind::Gaussian: return b;
        case Kind::Uniform: return (b - a) * (b - a) / 12.0;
        case Kind::Constant: return 0.0;
    }
    return 0.0;
}

double DistComponent::raw_moment(int n) const {
    if (n < 0) throw std::invalid_argument("negative moment order");
    switch (kind) {
        case Kind::Gaussian: {
            // m_n = mu m_{n-1} + (n-1) sigma^2 m_{n-2}
            double m0 = 1.0, m1 = a;
            if (n == 0) return m0;
            for (int k = 2; k <= n; ++k) {
                double m2 = a * m1 + (k - 1) * b * m0;
                m0 = m1;
                m1 = m2;
            }
            return m1;
        }
        case Kind::Uniform: {
            // (b^{n+1} - a^{n+1}) / ((n+1)(b-a))
            double pa = 1.0, pb = 1.0;
            for (int k = 0; k <= n; ++k) {
                pa *= a;
                pb *= b;
            }
            return (pb - pa) / ((n + 1) * (b - a));
        }
        case Kind::Constant: {
            double v = 1.0;
            for (int k = 0; k < n; ++k) v *= a;
            return v;
        }
    }
    return 0.0;
}

MomentTable initial_moments(const InitialDistribution& dist, int max_order) {
    if (dist.dimension() < 1) throw config_error("initial distribution needs at least one component");
    const int d = dist.dimension();
    MomentTable table(d, max_order);
    // Per-component 1D moments up to max_order.
    std::vector<std::vector<double>> comp(d);
    for (int i = 0; i < d; ++i) {
        comp[i].resize(static_cast<std::size_t>(max_order) + 1);
        for (int n = 0; n <= max_order; ++n) comp[i][n] = dist.components[i].raw_moment(n);
    }
    const auto& gb = table.basis();
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const MultiIndex& g = gb.at(p);
        double v = 1.0;
        for (int i = 0; i < d; ++i) v *= comp[i][g[i]];
        table.at(p) = v;
    }
    return table;
}

}  // namespace rpcsde
