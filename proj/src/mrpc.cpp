#include "rpcsde/mrpc.hpp"

#include <cmath>
#include <functional>

namespace rpcsde {

void MrpcConfig::validate() const {
    if (L < 1) throw config_error("L must be >= 1");
    if (S < 0) throw config_error("S must be >= 0");
    if (!(h > 0)) throw config_error("h must be > 0");
    if (!(T >= h)) throw config_error("T must be >= h");
    if (record_every < 1) throw config_error("record_every must be >= 1");
    if (guard_orders < 0) throw config_error("guard_orders must be >= 0");
    if (!(pivot_floor > 0)) throw config_error("pivot_floor must be > 0");
}

bool check_model_degrees(const ModelSpec& model, int S) {
    const int db = model.max_drift_degree();
    if (db > S + 1)
        throw degree_error("drift degree " + std::to_string(db) + " exceeds S+1 = " +
                           std::to_string(S + 1));
    return std::max(db, 2 * model.max_diffusion_degree()) <= S;
}

namespace {

// The covariance term is evaluable when it fits the interaction budget, is
// representable in the basis, splits into representable sigma factors, or at
// worst stays inside the monomial recursion domain.
void check_diffusion_budget(const ModelSpec& model, int L, int S) {
    const int ds = model.max_diffusion_degree();
    if (2 * ds <= S || 2 * ds <= L || ds <= L || 2 * ds <= S + 2) return;
    throw degree_error("diffusion covariance degree " + std::to_string(2 * ds) +
                       " is not representable at L = " + std::to_string(L) +
                       ", S = " + std::to_string(S));
}

}  // namespace

MomentTable moment_shift(const MomentTable& m, const std::vector<double>& delta) {
    const int d = m.dimension();
    if (static_cast<int>(delta.size()) != d)
        throw dimension_error("shift vector dimension mismatch");
    MomentTable out(d, m.max_order());
    const GradedBasis& gb = m.basis();
    MultiIndex beta(d, 0);
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const MultiIndex& gamma = gb.at(p);
        double total = 0.0;
        // sum over beta <= gamma of prod_i C(gamma_i, beta_i) delta_i^{gamma_i - beta_i}
        std::function<void(int, double)> walk = [&](int coord, double scale) {
            if (coord == d) {
                total += scale * m.get(beta);
                return;
            }
            double binom = 1.0;
            double dpow = 1.0;
            // iterate beta[coord] = gamma[coord] down to 0 so delta powers accumulate
            for (int b = gamma[coord]; b >= 0; --b) {
                beta[coord] = b;
                walk(coord + 1, scale * binom * dpow);
                binom = binom * b / (gamma[coord] - b + 1);
                dpow *= delta[coord];
            }
            beta[coord] = 0;
        };
        walk(0, 1.0);
        out.at(p) = total;
    }
    return out;
}

MvPoly poly_shift(const MvPoly& p, const std::vector<double>& delta) {
    const int d = p.dimension();
    if (static_cast<int>(delta.size()) != d)
        throw dimension_error("shift vector dimension mismatch");
    MvPoly out(d);
    for (const auto& [alpha, c] : p.terms()) {
        std::vector<std::pair<MultiIndex, double>> terms = {{MultiIndex(d, 0), c}};
        for (int i = 0; i < d; ++i)
            for (int e = 0; e < alpha[i]; ++e) {
                std::vector<std::pair<MultiIndex, double>> next;
                next.reserve(terms.size() * 2);
                for (const auto& [mi, cc] : terms) {
                    MultiIndex up = mi;
                    up[i] += 1;
                    next.emplace_back(up, cc);
                    if (delta[i] != 0.0) next.emplace_back(mi, cc * delta[i]);
                }
                terms = std::move(next);
            }
        for (const auto& [mi, cc] : terms) out.add_term(mi, cc);
    }
    return out;
}

MomentTable moment_scale(const MomentTable& m, const std::vector<double>& scale) {
    const int d = m.dimension();
    if (static_cast<int>(scale.size()) != d)
        throw dimension_error("scale vector dimension mismatch");
    MomentTable out(d, m.max_order());
    const GradedBasis& gb = m.basis();
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const MultiIndex& g = gb.at(p);
        double s = 1.0;
        for (int i = 0; i < d; ++i)
            for (int e = 0; e < g[i]; ++e) s *= scale[i];
        out.at(p) = s * m.at(p);
    }
    return out;
}

MvPoly poly_scale(const MvPoly& p, const std::vector<double>& scale) {
    const int d = p.dimension();
    if (static_cast<int>(scale.size()) != d)
        throw dimension_error("scale vector dimension mismatch");
    MvPoly out(d);
    for (const auto& [alpha, c] : p.terms()) {
        double s = c;
        for (int i = 0; i < d; ++i)
            for (int e = 0; e < alpha[i]; ++e) s *= scale[i];
        out.add_term(alpha, s);
    }
    return out;
}

namespace {

std::vector<double> mean_of(const MomentTable& raw) {
    const int d = raw.dimension();
    std::vector<double> mu(d);
    MultiIndex e(d, 0);
    for (int i = 0; i < d; ++i) {
        e.assign(d, 0);
        e[i] = 1;
        mu[i] = raw.get(e);
    }
    return mu;
}

std::vector<double> sd_of(const MomentTable& raw, const std::vector<double>& mu) {
    const int d = raw.dimension();
    std::vector<double> sd(d);
    MultiIndex e(d, 0);
    for (int i = 0; i < d; ++i) {
        e.assign(d, 0);
        e[i] = 2;
        const double var = raw.get(e) - mu[i] * mu[i];
        // a vanishing direction will fail the Cholesky pivot anyway; the floor
        // only guards the division
        sd[i] = std::sqrt(std::max(var, 1e-30));
    }
    return sd;
}

std::vector<double> negated(std::vector<double> v) {
    for (double& x : v) x = -x;
    return v;
}

std::vector<double> inverted(std::vector<double> v) {
    for (double& x : v) x = 1.0 / x;
    return v;
}

}  // namespace

MrpcCalculus::MrpcCalculus(const MomentTable& raw, const MrpcConfig& cfg)
    : mean(mean_of(raw)),
      sd(sd_of(raw, mean)),
      standardized(moment_scale(moment_shift(raw, negated(mean)), inverted(sd))),
      basis(basis_from_moments(standardized, cfg.L, cfg.pivot_floor)),
      tensor(triple_products(basis, standardized, cfg.S, cfg.mode)),
      engine(basis, tensor, &standardized) {}

double MrpcCalculus::expect_raw_monomial(const MultiIndex& gamma) const {
    const int d = standardized.dimension();
    MultiIndex beta(d, 0);
    double total = 0.0;
    // E[x^gamma] = E[prod_i (sd_i y_i + mean_i)^gamma_i]
    std::function<void(int, double)> walk = [&](int coord, double scale) {
        if (coord == d) {
            total += scale * engine.expect_monomial(beta);
            return;
        }
        double binom = 1.0;
        double mpow = 1.0;
        double spow = 1.0;
        for (int b = 0; b < gamma[coord]; ++b) spow *= sd[coord];
        for (int b = gamma[coord]; b >= 0; --b) {
            beta[coord] = b;
            walk(coord + 1, scale * binom * mpow * spow);
            binom = binom * b / (gamma[coord] - b + 1);
            mpow *= mean[coord];
            spow /= sd[coord];
        }
        beta[coord] = 0;
    };
    walk(0, 1.0);
    return total;
}

double MrpcCalculus::expect_std_product(const MultiIndex& beta, const MvPoly& q,
                                        const std::vector<double>* q_exp,
                                        const PairExpansions* pairs) const {
    if (q.is_zero()) return 0.0;
    if (total_order(beta) + q.degree() <= standardized.max_order()) {
        double s = 0.0;  // every monomial sits in the table
        for (const auto& [rho, c] : q.terms()) s += c * engine.expect_monomial(mi_add(beta, rho));
        return s;
    }
    if (q_exp) {
        const std::vector<double>& rep = engine.repr(beta);
        double s = 0.0;
        for (std::size_t a = 0; a < rep.size(); ++a)
            if ((*q_exp)[a] != 0.0) s += rep[a] * (*q_exp)[a];
        return s;
    }
    if (pairs) {
        double s = 0.0;
        for (const auto& [wa, wb] : *pairs) s += expect_std_pair(beta, *wa, *wb);
        return s;
    }
    double s = 0.0;
    for (const auto& [rho, c] : q.terms()) s += c * engine.expect_monomial(mi_add(beta, rho));
    return s;
}

double MrpcCalculus::expect_std_pair(const MultiIndex& beta, const std::vector<double>& wa,
                                     const std::vector<double>& wb) const {
    const GradedBasis& gl = tensor.graded();
    const int cap = tensor.total_cap();
    const std::vector<double>& rep = engine.repr(beta);
    double total = 0.0;
    for (std::size_t a = 0; a < wa.size(); ++a) {
        if (wa[a] == 0.0) continue;
        const double* sl = tensor.slice(a);
        for (std::size_t b = 0; b < wb.size(); ++b) {
            if (wb[b] == 0.0) continue;
            const std::size_t eta_max = gl.count_up_to(cap - gl.order_of(a) - gl.order_of(b));
            const double* row = sl + b * tensor.side();
            double acc = 0.0;
            for (std::size_t eta = 0; eta < eta_max; ++eta) acc += rep[eta] * row[eta];
            total += wa[a] * wb[b] * acc;
        }
    }
    return total;
}

namespace {

// sum over beta <= mu of C(mu, beta) sd^beta mean^(mu - beta) f(beta)
double binomial_pullback(const MultiIndex& mu, const std::vector<double>& mean,
                         const std::vector<double>& sd,
                         const std::function<double(const MultiIndex&)>& f) {
    const int d = static_cast<int>(mu.size());
    MultiIndex beta(d, 0);
    double total = 0.0;
    std::function<void(int, double)> walk = [&](int coord, double scale) {
        if (coord == d) {
            total += scale * f(beta);
            return;
        }
        double binom = 1.0;
        double mpow = 1.0;
        double spow = 1.0;
        for (int b = 0; b < mu[coord]; ++b) spow *= sd[coord];
        for (int b = mu[coord]; b >= 0; --b) {
            beta[coord] = b;
            walk(coord + 1, scale * binom * mpow * spow);
            binom = binom * b / (mu[coord] - b + 1);
            mpow *= mean[coord];
            spow /= sd[coord];
        }
        beta[coord] = 0;
    };
    walk(0, 1.0);
    return total;
}

}  // namespace

double MrpcCalculus::expect_raw_times(const MultiIndex& mu, const MvPoly& q_raw) const {
    if (q_raw.is_zero()) return 0.0;
    const MvPoly q_y = poly_scale(poly_shift(q_raw, mean), sd);
    std::vector<double> q_exp;
    const std::vector<double>* pe = nullptr;
    if (q_y.degree() <= basis.degree()) {
        q_exp = basis.expand(q_y);
        pe = &q_exp;
    }
    return binomial_pullback(mu, mean, sd, [&](const MultiIndex& beta) {
        return expect_std_product(beta, q_y, pe, nullptr);
    });
}

double MrpcCalculus::expect_raw_times_pair(const MultiIndex& mu, const MvPoly& qa_raw,
                                           const MvPoly& qb_raw) const {
    if (qa_raw.is_zero() || qb_raw.is_zero()) return 0.0;
    const int L = basis.degree();
    const MvPoly prod_y = poly_scale(poly_shift(poly_mul(qa_raw, qb_raw), mean), sd);
    std::vector<double> prod_exp;
    const std::vector<double>* pe = nullptr;
    if (prod_y.degree() <= L) {
        prod_exp = basis.expand(prod_y);
        pe = &prod_exp;
    }
    std::vector<double> wa, wb;
    PairExpansions pairs;
    const PairExpansions* pp = nullptr;
    if (!pe && qa_raw.degree() <= L && qb_raw.degree() <= L) {
        wa = basis.expand(poly_scale(poly_shift(qa_raw, mean), sd));
        wb = basis.expand(poly_scale(poly_shift(qb_raw, mean), sd));
        pairs.emplace_back(&wa, &wb);
        pp = &pairs;
    }
    return binomial_pullback(mu, mean, sd, [&](const MultiIndex& beta) {
        return expect_std_product(beta, prod_y, pe, pp);
    });
}

MrpcState mrpc_init(const ModelSpec& model, const MrpcConfig& cfg) {
    cfg.validate();
    model.validate();
    check_model_degrees(model, cfg.S);
    check_diffusion_budget(model, cfg.L, cfg.S);
    MrpcState state(model.dim, cfg.moment_order());
    state.moments = initial_moment_table(model, cfg.moment_order());
    return state;
}

namespace {

long step_count(double T, double h) {
    const double ratio = T / h;
    const long n = static_cast<long>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw config_error("T/h must be an integer number of steps");
    return n;
}

MomentTable update_moments(const MomentTable& raw, const ModelSpec& model,
                           const std::vector<std::vector<MvPoly>>& sigma_cov,
                           const MrpcCalculus& calc, const MrpcConfig& cfg) {
    const int d = model.dim;
    const double h = cfg.h;

    // coefficient polynomials standardized along with the state (exact):
    // y-dynamics have drift b_i(sd y + mean)/sd_i and diffusion sigma/sd_i
    auto standardize = [&](const MvPoly& p, double out_scale) {
        return poly_scale(poly_shift(p, calc.mean), calc.sd) * out_scale;
    };
    const int L = cfg.L;
    std::vector<MvPoly> drift_c(d, MvPoly(d));
    std::vector<std::vector<double>> drift_exp(d);
    for (int i = 0; i < d; ++i) {
        drift_c[i] = standardize(model.drift[i], 1.0 / calc.sd[i]);
        if (!drift_c[i].is_zero() && drift_c[i].degree() <= L)
            drift_exp[i] = calc.basis.expand(drift_c[i]);
    }
    // covariance polynomials: basis expansion when the degree allows, sigma
    // factor expansions per channel when the product exceeds the basis degree
    std::vector<std::vector<MvPoly>> cov_c(d, std::vector<MvPoly>(d, MvPoly(d)));
    std::vector<std::vector<std::vector<double>>> cov_exp(d, std::vector<std::vector<double>>(d));
    const bool need_pairs = 2 * model.max_diffusion_degree() > L &&
                            model.max_diffusion_degree() <= L;
    std::vector<std::vector<std::vector<double>>> sigma_exp;
    if (need_pairs) {
        sigma_exp.assign(d, std::vector<std::vector<double>>(model.noise_dim));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < model.noise_dim; ++j)
                if (!model.diffusion[i][j].is_zero())
                    sigma_exp[i][j] =
                        calc.basis.expand(standardize(model.diffusion[i][j], 1.0 / calc.sd[i]));
    }
    std::vector<std::vector<MrpcCalculus::PairExpansions>> cov_pairs(
        d, std::vector<MrpcCalculus::PairExpansions>(d));
    for (int i = 0; i < d; ++i)
        for (int l = i; l < d; ++l) {
            if (sigma_cov[i][l].is_zero()) continue;
            cov_c[i][l] = standardize(sigma_cov[i][l], 1.0 / (calc.sd[i] * calc.sd[l]));
            if (cov_c[i][l].degree() <= L) {
                cov_exp[i][l] = calc.basis.expand(cov_c[i][l]);
            } else if (need_pairs) {
                for (int j = 0; j < model.noise_dim; ++j)
                    if (!sigma_exp[i][j].empty() && !sigma_exp[l][j].empty())
                        cov_pairs[i][l].emplace_back(&sigma_exp[i][j], &sigma_exp[l][j]);
            }
        }

    // first-order update of the standardized moments
    MomentTable std_next(d, raw.max_order());
    const GradedBasis& gb = raw.basis();
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const MultiIndex& gamma = gb.at(p);
        double m = calc.standardized.at(p);
        for (int i = 0; i < d; ++i) {
            if (gamma[i] < 1 || drift_c[i].is_zero()) continue;
            MultiIndex mu = gamma;
            mu[i] -= 1;
            const std::vector<double>* pe = drift_exp[i].empty() ? nullptr : &drift_exp[i];
            m += h * gamma[i] * calc.expect_std_product(mu, drift_c[i], pe, nullptr);
        }
        for (int i = 0; i < d; ++i) {
            if (gamma[i] < 1) continue;
            for (int l = i; l < d; ++l) {
                const int delta = (i == l) ? 1 : 0;
                if (gamma[l] - delta < 1 || cov_c[i][l].is_zero()) continue;
                const double coef = gamma[i] * (gamma[l] - delta) / (1.0 + delta);
                MultiIndex mu = gamma;
                mu[i] -= 1;
                mu[l] -= 1;
                const std::vector<double>* pe = cov_exp[i][l].empty() ? nullptr : &cov_exp[i][l];
                const MrpcCalculus::PairExpansions* pp =
                    cov_pairs[i][l].empty() ? nullptr : &cov_pairs[i][l];
                m += h * coef * calc.expect_std_product(mu, cov_c[i][l], pe, pp);
            }
        }
        std_next.at(p) = m;
    }
    // back to raw coordinates about the step-k mean and scale
    MomentTable next(d, raw.max_order());
    next.values() = moment_shift(moment_scale(std_next, calc.sd), calc.mean).values();
    return next;
}

MrpcDiagnostics diagnostics_of(const MrpcCalculus& calc, int L) {
    MrpcDiagnostics diag;
    const auto [lo, hi] = hankel_spectrum_bounds(calc.standardized, L);
    diag.lambda_min = lo;
    diag.lambda_max = hi;
    diag.ortho_residual = orthonormality_residual(calc.basis, calc.standardized);
    return diag;
}

}  // namespace

MrpcState mrpc_step(const MrpcState& state, const ModelSpec& model, const MrpcConfig& cfg) {
    cfg.validate();
    check_model_degrees(model, cfg.S);
    check_diffusion_budget(model, cfg.L, cfg.S);
    const auto sigma_cov = diffusion_covariance(model);
    MrpcCalculus calc(state.moments, cfg);
    MrpcState next(model.dim, cfg.moment_order());
    next.step = state.step + 1;
    next.moments = update_moments(state.moments, model, sigma_cov, calc, cfg);
    next.diag = diagnostics_of(calc, cfg.L);
    return next;
}

RunResult mrpc_run(const ModelSpec& full_model, const MrpcConfig& cfg) {
    cfg.validate();
    const long n = step_count(cfg.T, cfg.h);
    RunResult result;
    result.dimension = full_model.dim;
    result.moment_order = cfg.moment_order();

    // Frozen deterministic components would degenerate the Hankel matrix;
    // run on the reduced model and reinstate their moment factors on output.
    const ReducedModel reduced = fold_constant_components(full_model);
    const ModelSpec& model = reduced.model;

    MrpcState state = mrpc_init(model, cfg);
    const auto sigma_cov = diffusion_covariance(model);

    auto push = [&](double t, const MomentTable& m, const MrpcDiagnostics& diag) {
        StepRecord rec;
        rec.t = t;
        rec.moments = inflate_moments(reduced, full_model.dim, cfg.moment_order(), m.values());
        rec.lambda_min = diag.lambda_min;
        rec.lambda_max = diag.lambda_max;
        rec.ortho_residual = diag.ortho_residual;
        result.records.push_back(std::move(rec));
    };

    for (long k = 0; k <= n; ++k) {
        const double t = k * cfg.h;
        const bool record = (k % cfg.record_every == 0) || k == n;
        try {
            MrpcCalculus calc(state.moments, cfg);
            if (record) push(t, state.moments, diagnostics_of(calc, cfg.L));
            if (k == n) break;
            state.moments = update_moments(state.moments, model, sigma_cov, calc, cfg);
            state.step = k + 1;
        } catch (const numeric_error& err) {
            result.status = 3;
            result.error = err.what();
            result.failure_step = k;
            break;
        }
    }
    return result;
}

}  // namespace rpcsde
