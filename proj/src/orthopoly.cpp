#include "rpcsde/orthopoly.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rpcsde/linalg.hpp"

namespace rpcsde {

MomentTable::MomentTable(int dimension, int max_order) : basis_(dimension, max_order) {
    values_.assign(basis_.size(), 0.0);
    values_[0] = 1.0;
}

OrthonormalBasis::OrthonormalBasis(int dimension, int degree) : gb_(dimension, degree) {
    B_.assign(gb_.size() * gb_.size(), 0.0);
    Binv_.assign(gb_.size() * gb_.size(), 0.0);
    for (std::size_t i = 0; i < gb_.size(); ++i) {
        B_[i * gb_.size() + i] = 1.0;
        Binv_[i * gb_.size() + i] = 1.0;
    }
}

MvPoly OrthonormalBasis::row_poly(std::size_t alpha) const {
    MvPoly p(dimension());
    for (std::size_t beta = 0; beta <= alpha; ++beta) {
        const double c = b(alpha, beta);
        if (c != 0.0) p.add_term(gb_.at(beta), c);
    }
    return p;
}

std::vector<double> OrthonormalBasis::expand(const MvPoly& p) const {
    if (p.dimension() != dimension())
        throw dimension_error("polynomial dimension does not match basis");
    if (p.degree() > degree())
        throw degree_error("polynomial degree " + std::to_string(p.degree()) +
                           " exceeds basis degree " + std::to_string(degree()));
    const std::size_t n = size();
    std::vector<double> c(n, 0.0);
    for (const auto& [gamma, q] : p.terms()) {
        const std::size_t row = gb_.position(gamma);
        // x^gamma = sum_alpha Binv[gamma][alpha] T_alpha, alpha <= row by triangularity
        for (std::size_t alpha = 0; alpha <= row; ++alpha) c[alpha] += q * binv(row, alpha);
    }
    return c;
}

TripleTensor::TripleTensor(int dimension, int degree, int interaction, int total_cap)
    : gb_(dimension, degree), L_(degree), S_(interaction), cap_(total_cap), n_(gb_.size()) {
    values_.assign(n_ * n_ * n_, std::numeric_limits<double>::quiet_NaN());
}

double TripleTensor::get(std::size_t a, std::size_t b, std::size_t c) const {
    if (!in_set(a, b, c))
        throw closure_error("triple product lookup (" + mi_text(gb_.at(a)) + ", " +
                            mi_text(gb_.at(b)) + ", " + mi_text(gb_.at(c)) +
                            ") outside the restricted index set (cap " + std::to_string(cap_) + ")");
    return values_[(a * n_ + b) * n_ + c];
}

std::vector<double> hankel_matrix(const MomentTable& m, int degree) {
    if (m.max_order() < 2 * degree)
        throw degree_error("Hankel matrix needs moments to order " + std::to_string(2 * degree));
    GradedBasis gb(m.dimension(), degree);
    const std::size_t n = gb.size();
    std::vector<double> h(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) h[a * n + b] = m.get(mi_add(gb.at(a), gb.at(b)));
    return h;
}

OrthonormalBasis basis_from_moments(const MomentTable& m, int degree, double pivot_floor) {
    OrthonormalBasis basis(m.dimension(), degree);
    const std::size_t n = basis.size();
    const auto h = hankel_matrix(m, degree);
    auto g = cholesky_lower(h, n, pivot_floor);
    basis.binv_data() = g;
    basis.b_data() = invert_lower_triangular(g, n);
    return basis;
}

TripleTensor triple_products(const OrthonormalBasis& basis, const MomentTable& m, int interaction,
                             TensorMode mode) {
    const int L = basis.degree();
    const int cap = (mode == TensorMode::Full) ? 3 * L : 2 * L + interaction;
    if (m.max_order() < cap)
        throw degree_error("triple products need moments to order " + std::to_string(cap));

    TripleTensor t(m.dimension(), L, interaction, cap);
    const GradedBasis& gl = t.graded();
    const GradedBasis& gj = m.basis();
    const std::size_t n = gl.size();

    // Pairwise position-addition tables into the moment basis.
    std::vector<std::size_t> add_ll(n * n, 0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (gl.order_of(a) + gl.order_of(b) <= m.max_order())
                add_ll[a * n + b] = gj.position(mi_add(gl.at(a), gl.at(b)));
    std::vector<std::size_t> add_jl(gj.size() * n, 0);
    for (std::size_t a = 0; a < gj.size(); ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (gj.order_of(a) + gl.order_of(b) <= m.max_order())
                add_jl[a * n + b] = gj.position(mi_add(gj.at(a), gl.at(b)));

    // Three-stage contraction, O(C_L^4):
    //   V[a][nu][eta] = sum_mu B[a][mu] m_{mu+nu+eta}
    //   U[a][b][eta]  = sum_nu B[b][nu] V[a][nu][eta]
    //   G[a][b][c]    = sum_eta B[c][eta] U[a][b][eta]
    // with every loop cut at the total-degree cap.
    std::vector<double> V(n * n * n, 0.0), U(n * n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const int oa = gl.order_of(a);
        for (std::size_t nu = 0; nu < n; ++nu) {
            const int on = gl.order_of(nu);
            if (oa + on > cap) break;
            const std::size_t eta_max = gl.count_up_to(cap - oa - on);
            for (std::size_t eta = 0; eta < eta_max; ++eta) {
                double s = 0.0;
                const std::size_t mu_max = gl.count_up_to(oa);
                const std::size_t ne = add_ll[nu * n + eta];
                for (std::size_t mu = 0; mu < mu_max; ++mu) {
                    const double bm = basis.b(a, mu);
                    if (bm != 0.0) s += bm * m.at(add_jl[ne * n + mu]);
                }
                V[(a * n + nu) * n + eta] = s;
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        const int oa = gl.order_of(a);
        for (std::size_t b = 0; b < n; ++b) {
            const int ob = gl.order_of(b);
            if (oa + ob > cap) break;
            const std::size_t eta_max = gl.count_up_to(cap - oa - ob);
            const std::size_t nu_max = gl.count_up_to(ob);
            for (std::size_t eta = 0; eta < eta_max; ++eta) {
                double s = 0.0;
                for (std::size_t nu = 0; nu < nu_max; ++nu) {
                    const double bn = basis.b(b, nu);
                    if (bn != 0.0) s += bn * V[(a * n + nu) * n + eta];
                }
                U[(a * n + b) * n + eta] = s;
            }
        }
    }
    // Canonical representative a <= b <= c, value copied to all permutations.
    for (std::size_t a = 0; a < n; ++a) {
        const int oa = gl.order_of(a);
        for (std::size_t b = a; b < n; ++b) {
            const int ob = gl.order_of(b);
            if (oa + ob > cap) break;
            for (std::size_t c = b; c < n; ++c) {
                const int oc = gl.order_of(c);
                if (oa + ob + oc > cap) break;
                double s = 0.0;
                const std::size_t eta_max = gl.count_up_to(oc);
                for (std::size_t eta = 0; eta < eta_max; ++eta) {
                    const double bc = basis.b(c, eta);
                    if (bc != 0.0) s += bc * U[(a * n + b) * n + eta];
                }
                t.set(a, b, c, s);
                t.set(a, c, b, s);
                t.set(b, a, c, s);
                t.set(b, c, a, s);
                t.set(c, a, b, s);
                t.set(c, b, a, s);
            }
        }
    }
    return t;
}

std::vector<double> monomial_in_basis(const OrthonormalBasis& basis, const MultiIndex& gamma) {
    if (total_order(gamma) > basis.degree())
        throw degree_error("monomial order exceeds basis degree");
    const std::size_t row = basis.graded().position(gamma);
    const std::size_t n = basis.size();
    std::vector<double> c(n, 0.0);
    for (std::size_t alpha = 0; alpha <= row; ++alpha) c[alpha] = basis.binv(row, alpha);
    return c;
}

std::pair<double, double> hankel_spectrum_bounds(const MomentTable& m, int degree) {
    const auto h = hankel_matrix(m, degree);
    return symmetric_eigen_bounds(h, binomial_size(m.dimension(), degree));
}

double orthonormality_residual(const OrthonormalBasis& basis, const MomentTable& m) {
    const std::size_t n = basis.size();
    const auto h = hankel_matrix(m, basis.degree());
    // max |B H B^T - I|
    std::vector<double> bh(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k <= i; ++k) {
            const double bik = basis.b(i, k);
            if (bik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) bh[i * n + j] += bik * h[k * n + j];
        }
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += bh[i * n + k] * basis.b(j, k);
            resid = std::max(resid, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    return resid;
}

}  // namespace rpcsde
