#include "rpcsde/prpc.hpp"

#include <algorithm>
#include <cmath>

#include "rpcsde/linalg.hpp"

namespace rpcsde {

namespace {

void validate_prpc(const ModelSpec& model, const MrpcConfig& cfg) {
    cfg.validate();
    model.validate();
    if (cfg.S > cfg.L)
        throw config_error("pRPC needs S <= L so coefficients expand in the basis");
    const int db = model.max_drift_degree();
    const int ds = model.max_diffusion_degree();
    if (db > cfg.S || 2 * ds > cfg.S)
        throw degree_error("pRPC needs max{deg p_b, 2 deg p_sigma} <= S");
}

struct StepWork {
    int d, L, S, cap;
    std::size_t n;
    const GradedBasis* gb;
    std::vector<std::vector<double>> pb;                 // drift expansions
    std::vector<std::vector<std::vector<double>>> scov;  // covariance expansions, i <= l
    std::vector<std::vector<std::vector<double>>> d1;    // d1[i][a]: expansion of d_i T_a
    std::vector<std::vector<std::vector<double>>> d2;    // d2[pair(i,l)][a]
    std::vector<std::vector<double>> g_pb;               // g matrices, n x n
    std::vector<std::vector<std::vector<double>>> g_scov;

    int pair_index(int i, int l) const { return i * d - i * (i - 1) / 2 + (l - i); }
};

// g[P]_{nu,c} = sum_mu P_mu Gamma_{nu c mu}; every touched triple satisfies
// |nu| + |c| + |mu| <= 2L + S.
std::vector<double> g_matrix(const TripleTensor& t, const std::vector<double>& p_exp) {
    const GradedBasis& gb = t.graded();
    const std::size_t n = t.side();
    const int dp = support_degree(p_exp, gb);
    std::vector<double> g(n * n, 0.0);
    if (dp < 0) return g;
    for (std::size_t nu = 0; nu < n; ++nu) {
        const double* sl = t.slice(nu);
        for (std::size_t c = nu; c < n; ++c) {
            const std::size_t mu_max =
                gb.count_up_to(std::min(dp, t.total_cap() - gb.order_of(nu) - gb.order_of(c)));
            const double* row = sl + c * n;
            double s = 0.0;
            for (std::size_t mu = 0; mu < mu_max; ++mu)
                if (p_exp[mu] != 0.0) s += p_exp[mu] * row[mu];
            g[nu * n + c] = s;
            g[c * n + nu] = s;
        }
    }
    return g;
}

StepWork prepare(const PrpcState& state, const ModelSpec& model, const MrpcConfig& cfg) {
    StepWork w;
    w.d = model.dim;
    w.L = cfg.L;
    w.S = cfg.S;
    w.cap = state.tensor.total_cap();
    w.n = state.basis.size();
    w.gb = &state.tensor.graded();

    const auto sigma_cov = diffusion_covariance(model);
    w.pb.resize(w.d);
    for (int i = 0; i < w.d; ++i)
        w.pb[i] = model.drift[i].is_zero() ? std::vector<double>(w.n, 0.0)
                                           : state.basis.expand(model.drift[i]);
    w.scov.assign(w.d, {});
    for (int i = 0; i < w.d; ++i) {
        w.scov[i].resize(w.d);
        for (int l = i; l < w.d; ++l)
            w.scov[i][l] = sigma_cov[i][l].is_zero() ? std::vector<double>(w.n, 0.0)
                                                     : state.basis.expand(sigma_cov[i][l]);
    }

    w.d1.assign(w.d, std::vector<std::vector<double>>(w.n));
    const int npairs = w.d * (w.d + 1) / 2;
    w.d2.assign(npairs, std::vector<std::vector<double>>(w.n));
    for (std::size_t a = 0; a < w.n; ++a) {
        const MvPoly row = state.basis.row_poly(a);
        std::vector<MvPoly> first;
        first.reserve(w.d);
        for (int i = 0; i < w.d; ++i) {
            first.push_back(poly_diff(row, i));
            w.d1[i][a] = state.basis.expand(first.back());
        }
        for (int i = 0; i < w.d; ++i)
            for (int l = i; l < w.d; ++l)
                w.d2[w.pair_index(i, l)][a] = state.basis.expand(poly_diff(first[i], l));
    }

    w.g_pb.resize(w.d);
    for (int i = 0; i < w.d; ++i) w.g_pb[i] = g_matrix(state.tensor, w.pb[i]);
    w.g_scov.assign(w.d, {});
    for (int i = 0; i < w.d; ++i) {
        w.g_scov[i].resize(w.d);
        for (int l = i; l < w.d; ++l) w.g_scov[i][l] = g_matrix(state.tensor, w.scov[i][l]);
    }
    return w;
}

// E[A T_u P] = sum_eta A_eta g[P]_{eta, u}
double expect3(const StepWork& w, const std::vector<double>& A, std::size_t u,
               const std::vector<double>& g) {
    double s = 0.0;
    for (std::size_t eta = 0; eta < w.n; ++eta)
        if (A[eta] != 0.0) s += A[eta] * g[eta * w.n + u];
    return s;
}

// E[A B P] with two expansions = A^T g[P] B
double expect3b(const StepWork& w, const std::vector<double>& A, const std::vector<double>& B,
                const std::vector<double>& g) {
    double s = 0.0;
    for (std::size_t eta = 0; eta < w.n; ++eta) {
        if (A[eta] == 0.0) continue;
        const double* row = g.data() + eta * w.n;
        double acc = 0.0;
        for (std::size_t kappa = 0; kappa < w.n; ++kappa)
            if (B[kappa] != 0.0) acc += B[kappa] * row[kappa];
        s += A[eta] * acc;
    }
    return s;
}

// E[A T_u T_v P]: project the pair (A, T_u) at the level adapted to the index
// magnitudes, then contract against T_v and the coefficient polynomial.
double expect4(const StepWork& w, const TripleTensor& t, const std::vector<double>& A,
               std::size_t u, std::size_t v, const std::vector<double>& g) {
    const GradedBasis& gb = *w.gb;
    const int ou = gb.order_of(u);
    const double* gv = g.data() + v * w.n;  // g symmetric: column v as row
    double s = 0.0;
    for (std::size_t eta = 0; eta < w.n; ++eta) {
        if (A[eta] == 0.0) continue;
        const int lev = std::min(w.L, w.cap - gb.order_of(eta) - ou);
        const std::size_t nu_max = gb.count_up_to(lev);
        const double* row = t.slice(eta) + u * w.n;
        double acc = 0.0;
        for (std::size_t nu = 0; nu < nu_max; ++nu) acc += row[nu] * gv[nu];
        s += A[eta] * acc;
    }
    return s;
}

// E[A B T_c P]: pair (A, B), contract (T_c, P).
double expect4b(const StepWork& w, const TripleTensor& t, const std::vector<double>& A,
                const std::vector<double>& B, std::size_t c, const std::vector<double>& g) {
    const GradedBasis& gb = *w.gb;
    const double* gc = g.data() + c * w.n;
    double s = 0.0;
    for (std::size_t eta = 0; eta < w.n; ++eta) {
        if (A[eta] == 0.0) continue;
        const int oeta = gb.order_of(eta);
        const double* sl = t.slice(eta);
        double acc_eta = 0.0;
        for (std::size_t kappa = 0; kappa < w.n; ++kappa) {
            if (B[kappa] == 0.0) continue;
            const int lev = std::min(w.L, w.cap - oeta - gb.order_of(kappa));
            const std::size_t nu_max = gb.count_up_to(lev);
            const double* row = sl + kappa * w.n;
            double acc = 0.0;
            for (std::size_t nu = 0; nu < nu_max; ++nu) acc += row[nu] * gc[nu];
            acc_eta += B[kappa] * acc;
        }
        s += A[eta] * acc_eta;
    }
    return s;
}

std::vector<double> evolve_inner_products(const StepWork& w, double h) {
    const std::size_t n = w.n;
    std::vector<double> H(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) H[a * n + a] = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            double acc = 0.0;
            for (int i = 0; i < w.d; ++i) {
                const auto& g = w.g_pb[i];
                acc += h * (expect3(w, w.d1[i][a], b, g) + expect3(w, w.d1[i][b], a, g));
            }
            for (int i = 0; i < w.d; ++i) {
                for (int l = i; l < w.d; ++l) {
                    const auto& g = w.g_scov[i][l];
                    const double wt = (i == l) ? 1.0 : 2.0;
                    const auto& dij = w.d2[w.pair_index(i, l)];
                    double diff = expect3(w, dij[a], b, g) + expect3(w, dij[b], a, g);
                    diff += expect3b(w, w.d1[i][a], w.d1[l][b], g) +
                            expect3b(w, w.d1[l][a], w.d1[i][b], g);
                    acc += 0.5 * h * wt * diff;
                }
            }
            H[a * n + b] += acc;
            H[b * n + a] = H[a * n + b];
        }
    }
    return H;
}

TripleTensor evolve_triple_products(const PrpcState& state, const StepWork& w,
                                    const std::vector<double>& H, double h) {
    const std::size_t n = w.n;
    const GradedBasis& gb = *w.gb;
    TripleTensor tilde(w.d, w.L, w.S, w.cap);
    std::size_t legs[3];
    for (std::size_t a = 0; a < n; ++a) {
        const int oa = gb.order_of(a);
        for (std::size_t b = a; b < n; ++b) {
            const int ob = gb.order_of(b);
            if (oa + ob > w.cap) break;
            for (std::size_t c = b; c < n; ++c) {
                if (oa + ob + gb.order_of(c) > w.cap) break;
                double v;
                if (a == 0) {
                    // T_0 = 1: the triple-product evolution collapses to the
                    // inner-product evolution of the remaining pair.
                    v = H[b * n + c];
                } else {
                    v = state.tensor.raw(a, b, c);
                    legs[0] = a;
                    legs[1] = b;
                    legs[2] = c;
                    double acc = 0.0;
                    for (int i = 0; i < w.d; ++i) {
                        const auto& g = w.g_pb[i];
                        for (int x = 0; x < 3; ++x) {
                            const std::size_t u = legs[(x + 1) % 3] < legs[(x + 2) % 3]
                                                      ? legs[(x + 1) % 3]
                                                      : legs[(x + 2) % 3];
                            const std::size_t vv = legs[(x + 1) % 3] < legs[(x + 2) % 3]
                                                       ? legs[(x + 2) % 3]
                                                       : legs[(x + 1) % 3];
                            acc += h * expect4(w, state.tensor, w.d1[i][legs[x]], u, vv, g);
                        }
                    }
                    for (int i = 0; i < w.d; ++i) {
                        for (int l = i; l < w.d; ++l) {
                            const auto& g = w.g_scov[i][l];
                            const double wt = (i == l) ? 1.0 : 2.0;
                            const auto& dij = w.d2[w.pair_index(i, l)];
                            double diff = 0.0;
                            for (int x = 0; x < 3; ++x) {
                                const std::size_t u = legs[(x + 1) % 3] < legs[(x + 2) % 3]
                                                          ? legs[(x + 1) % 3]
                                                          : legs[(x + 2) % 3];
                                const std::size_t vv = legs[(x + 1) % 3] < legs[(x + 2) % 3]
                                                           ? legs[(x + 2) % 3]
                                                           : legs[(x + 1) % 3];
                                diff += expect4(w, state.tensor, dij[legs[x]], u, vv, g);
                            }
                            for (int x = 0; x < 3; ++x) {
                                for (int y = x + 1; y < 3; ++y) {
                                    const int z = 3 - x - y;
                                    diff += expect4b(w, state.tensor, w.d1[i][legs[x]],
                                                     w.d1[l][legs[y]], legs[z], g);
                                    diff += expect4b(w, state.tensor, w.d1[l][legs[x]],
                                                     w.d1[i][legs[y]], legs[z], g);
                                }
                            }
                            acc += 0.5 * h * wt * diff;
                        }
                    }
                    v += acc;
                }
                tilde.set(a, b, c, v);
                tilde.set(a, c, b, v);
                tilde.set(b, a, c, v);
                tilde.set(b, c, a, v);
                tilde.set(c, a, b, v);
                tilde.set(c, b, a, v);
            }
        }
    }
    return tilde;
}

// Gamma'_{abc} = sum L_{a mu} L_{b nu} L_{c eta} Gamma~_{mu nu eta}, restricted
// back to the index set; L triangular in graded order, so degrees only drop.
TripleTensor transform_tensor(const TripleTensor& tilde, const std::vector<double>& Lk,
                              const StepWork& w) {
    const std::size_t n = w.n;
    const GradedBasis& gb = *w.gb;
    TripleTensor out(w.d, w.L, w.S, w.cap);
    std::vector<double> W1(n * n * n, 0.0), W2(n * n * n, 0.0);
    for (std::size_t mu = 0; mu < n; ++mu) {
        const int omu = gb.order_of(mu);
        for (std::size_t nu = 0; nu < n; ++nu) {
            const int onu = gb.order_of(nu);
            if (omu + onu > w.cap) break;
            const std::size_t c_lim = gb.count_up_to(w.cap - omu - onu);
            const double* src = tilde.slice(mu) + nu * n;
            for (std::size_t c = 0; c < c_lim; ++c) {
                double s = 0.0;
                const double* lrow = Lk.data() + c * n;
                for (std::size_t eta = 0; eta <= c; ++eta)
                    if (lrow[eta] != 0.0) s += lrow[eta] * src[eta];
                W1[(mu * n + nu) * n + c] = s;
            }
        }
    }
    for (std::size_t mu = 0; mu < n; ++mu) {
        const int omu = gb.order_of(mu);
        for (std::size_t b = 0; b < n; ++b) {
            const int ob = gb.order_of(b);
            if (omu + ob > w.cap) break;
            const std::size_t c_lim = gb.count_up_to(w.cap - omu - ob);
            const double* lrow = Lk.data() + b * n;
            for (std::size_t c = 0; c < c_lim; ++c) {
                double s = 0.0;
                for (std::size_t nu = 0; nu <= b; ++nu)
                    if (lrow[nu] != 0.0) s += lrow[nu] * W1[(mu * n + nu) * n + c];
                W2[(mu * n + b) * n + c] = s;
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        const int oa = gb.order_of(a);
        const double* lrow = Lk.data() + a * n;
        for (std::size_t b = a; b < n; ++b) {
            const int ob = gb.order_of(b);
            if (oa + ob > w.cap) break;
            for (std::size_t c = b; c < n; ++c) {
                if (oa + ob + gb.order_of(c) > w.cap) break;
                double s = 0.0;
                for (std::size_t mu = 0; mu <= a; ++mu)
                    if (lrow[mu] != 0.0) s += lrow[mu] * W2[(mu * n + b) * n + c];
                out.set(a, b, c, s);
                out.set(a, c, b, s);
                out.set(b, a, c, s);
                out.set(b, c, a, s);
                out.set(c, a, b, s);
                out.set(c, b, a, s);
            }
        }
    }
    return out;
}

}  // namespace

PrpcState prpc_init(const ModelSpec& model, const MrpcConfig& cfg) {
    validate_prpc(model, cfg);
    const int J = 2 * cfg.L + cfg.S;
    const MomentTable table = initial_moment_table(model, J);
    PrpcState state(model.dim, cfg.L, cfg.S);
    state.basis = basis_from_moments(table, cfg.L, cfg.pivot_floor);
    state.tensor = triple_products(state.basis, table, cfg.S, TensorMode::Sparse);
    const auto [lo, hi] = hankel_spectrum_bounds(table, cfg.L);
    state.diag = {lo, hi, orthonormality_residual(state.basis, table)};
    return state;
}

PrpcState prpc_step(const PrpcState& state, const ModelSpec& model, const MrpcConfig& cfg) {
    validate_prpc(model, cfg);
    const std::size_t n = state.basis.size();
    StepWork w = prepare(state, model, cfg);

    std::vector<double> H = evolve_inner_products(w, cfg.h);
    TripleTensor tilde = evolve_triple_products(state, w, H, cfg.h);

    std::vector<double> G;
    try {
        G = cholesky_lower(H, n, cfg.pivot_floor);
    } catch (const singular_hankel_error& err) {
        const auto [lo, hi] = symmetric_eigen_bounds(H, n);
        throw singular_hankel_error(err.pivot_index, err.pivot_value,
                                    "evolved inner-product matrix lost positive definiteness "
                                    "(lambda_min = " +
                                        std::to_string(lo) + ")");
    }
    const std::vector<double> Lk = invert_lower_triangular(G, n);

    PrpcState next(model.dim, cfg.L, cfg.S);
    next.step = state.step + 1;
    // B' = Lk B, Binv' = Binv G
    auto& Bn = next.basis.b_data();
    auto& Bi = next.basis.binv_data();
    const auto& Bo = state.basis.b_data();
    const auto& Io = state.basis.binv_data();
    std::fill(Bn.begin(), Bn.end(), 0.0);
    std::fill(Bi.begin(), Bi.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k <= i; ++k) {
            const double lik = Lk[i * n + k];
            if (lik == 0.0) continue;
            for (std::size_t j = 0; j <= k; ++j) Bn[i * n + j] += lik * Bo[k * n + j];
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k <= i; ++k) {
            const double iok = Io[i * n + k];
            if (iok == 0.0) continue;
            for (std::size_t j = 0; j <= k; ++j) Bi[i * n + j] += iok * G[k * n + j];
        }
    next.tensor = transform_tensor(tilde, Lk, w);

    const auto [lo, hi] = symmetric_eigen_bounds(H, n);
    double resid = 0.0;
    // post-Cholesky orthonormality: Lk H Lk^T = I
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) {
                double hk = 0.0;
                for (std::size_t l = 0; l <= j; ++l) hk += H[k * n + l] * Lk[j * n + l];
                s += Lk[i * n + k] * hk;
            }
            resid = std::max(resid, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    next.diag = {lo, hi, resid};
    return next;
}

MomentTable prpc_moments(const PrpcState& state, int max_order) {
    const int cap = state.tensor.total_cap() + state.tensor.interaction();
    if (max_order > cap)
        throw degree_error("pRPC moment extraction limited to order " + std::to_string(cap));
    PceEngine engine(state.basis, state.tensor, nullptr);
    MomentTable table(state.basis.dimension(), max_order);
    const GradedBasis& gb = table.basis();
    for (std::size_t p = 0; p < gb.size(); ++p) table.at(p) = engine.expect_monomial(gb.at(p));
    return table;
}

RunResult prpc_run(const ModelSpec& full_model, const MrpcConfig& cfg) {
    const double ratio = cfg.T / cfg.h;
    const long n = static_cast<long>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw config_error("T/h must be an integer number of steps");

    RunResult result;
    result.dimension = full_model.dim;
    result.moment_order = 2 * cfg.L + cfg.S;

    const ReducedModel reduced = fold_constant_components(full_model);
    const ModelSpec& model = reduced.model;
    validate_prpc(model, cfg);

    PrpcState state = prpc_init(model, cfg);
    auto push = [&](double t, const PrpcState& st) {
        StepRecord rec;
        rec.t = t;
        rec.moments = inflate_moments(reduced, full_model.dim, result.moment_order,
                                      prpc_moments(st, result.moment_order).values());
        rec.lambda_min = st.diag.lambda_min;
        rec.lambda_max = st.diag.lambda_max;
        rec.ortho_residual = st.diag.ortho_residual;
        result.records.push_back(std::move(rec));
    };

    push(0.0, state);
    for (long k = 0; k < n; ++k) {
        try {
            state = prpc_step(state, model, cfg);
        } catch (const numeric_error& err) {
            result.status = 3;
            result.error = err.what();
            result.failure_step = k;
            break;
        }
        if ((k + 1) % cfg.record_every == 0 || k + 1 == n) push((k + 1) * cfg.h, state);
    }
    return result;
}

}  // namespace rpcsde
