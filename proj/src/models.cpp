#include "rpcsde/models.hpp"

#include <cmath>

namespace rpcsde {

void ModelSpec::validate() const {
    if (dim < 1) throw config_error("model dimension must be >= 1");
    if (noise_dim < 0) throw config_error("noise dimension must be >= 0");
    if (static_cast<int>(drift.size()) != dim) throw config_error("drift must have d components");
    if (static_cast<int>(diffusion.size()) != dim)
        throw config_error("diffusion must have d rows");
    for (const auto& row : diffusion)
        if (static_cast<int>(row.size()) != noise_dim)
            throw config_error("diffusion rows must have m columns");
    for (const auto& p : drift)
        if (p.dimension() != dim) throw dimension_error("drift polynomial dimension mismatch");
    for (const auto& row : diffusion)
        for (const auto& p : row)
            if (p.dimension() != dim)
                throw dimension_error("diffusion polynomial dimension mismatch");
    if (initial.dimension() != dim)
        throw config_error("initial distribution must have d components");
    for (const auto& link : copies) {
        if (link.target < 0 || link.target >= dim || link.source < 0 || link.source >= dim ||
            link.target == link.source)
            throw config_error("invalid copy link");
        for (const auto& other : copies)
            if (&other != &link && (other.source == link.target || other.target == link.source))
                throw config_error("chained copy links are not supported");
        if (link.jitter_sd < 0) throw config_error("copy jitter must be >= 0");
    }
}

int ModelSpec::max_drift_degree() const {
    int deg = 0;
    for (const auto& p : drift) deg = std::max(deg, p.degree());
    return deg;
}

int ModelSpec::max_diffusion_degree() const {
    int deg = 0;
    for (const auto& row : diffusion)
        for (const auto& p : row) deg = std::max(deg, p.degree());
    return deg;
}

namespace {

double take(const std::map<std::string, double>& overrides, std::map<std::string, double>& used,
            const std::string& key, double fallback) {
    auto it = overrides.find(key);
    if (it == overrides.end()) return fallback;
    used[key] = it->second;
    return it->second;
}

void check_used(const std::string& name, const std::map<std::string, double>& overrides,
                const std::map<std::string, double>& used) {
    for (const auto& [k, v] : overrides)
        if (!used.count(k)) throw config_error("unknown override '" + k + "' for model " + name);
}

MvPoly zero2(int d) { return MvPoly(d); }

ModelSpec make_ex41(const std::map<std::string, double>& ov, bool random_coeff) {
    std::map<std::string, double> used;
    const double a_u = take(ov, used, "a_u", 1.0);
    const double a_v = take(ov, used, "a_v", random_coeff ? 0.05 : 0.0);
    const double b_u = take(ov, used, "b_u", 1.2);
    const double b_v = take(ov, used, "b_v", 0.5);
    const double s_u = take(ov, used, "sigma_u", 0.5);
    const double s_v = take(ov, used, "sigma_v", 0.5);
    ModelSpec m;
    m.dim = 2;
    m.noise_dim = 2;
    m.default_T = take(ov, used, "T", 12.0);
    m.default_h = take(ov, used, "h", 0.012);

    // du = -(b_u + a_u v) u dt + sigma_u dW_u
    MvPoly b1(2);
    b1.add_term({1, 0}, -b_u);
    b1.add_term({1, 1}, -a_u);
    // dv = -(b_v + a_v u) v dt + sigma_v dW_v
    MvPoly b2(2);
    b2.add_term({0, 1}, -b_v);
    b2.add_term({1, 1}, -a_v);
    m.drift = {b1, b2};
    m.diffusion = {{MvPoly::constant(2, s_u), zero2(2)}, {zero2(2), MvPoly::constant(2, s_v)}};
    m.initial.components = {DistComponent::gaussian(1.0, s_u * s_u / (8.0 * b_u)),
                            DistComponent::gaussian(0.0, s_v * s_v / (8.0 * b_v))};

    // Three-variable form with the a_u slot as trailing random coefficient.
    MvPoly pb1(3);
    pb1.add_term({1, 0, 0}, -b_u);
    pb1.add_term({1, 1, 1}, -1.0);
    MvPoly pb2(3);
    pb2.add_term({0, 1, 0}, -b_v);
    pb2.add_term({1, 1, 0}, -a_v);
    m.param_drift = std::vector<MvPoly>{pb1, pb2};

    if (random_coeff) {
        m.name = "ex41_random_coeff";
        const double lo = take(ov, used, "a_u_lower", 0.1);
        const double hi = take(ov, used, "a_u_upper", 1.1);
        check_used(m.name, ov, used);
        return augment_parameter(m, DistComponent::uniform(lo, hi));
    }
    m.name = "ex41";
    check_used(m.name, ov, used);
    m.validate();
    return m;
}

ModelSpec make_ex42(const std::map<std::string, double>& ov) {
    std::map<std::string, double> used;
    ModelSpec m;
    m.name = "ex42";
    m.dim = 2;
    m.noise_dim = 2;
    m.default_T = take(ov, used, "T", 5.0);
    m.default_h = take(ov, used, "h", 0.001);
    check_used(m.name, ov, used);

    // du = (10 - 3u - v) dt + (0.5 + 0.1 v) dW_u
    MvPoly b1(2);
    b1.add_term({0, 0}, 10.0);
    b1.add_term({1, 0}, -3.0);
    b1.add_term({0, 1}, -1.0);
    // dv = (5 - u - 3v - v^3) dt + (0.3 + 0.1 u + 0.1 v^2) dW_v
    MvPoly b2(2);
    b2.add_term({0, 0}, 5.0);
    b2.add_term({1, 0}, -1.0);
    b2.add_term({0, 1}, -3.0);
    b2.add_term({0, 3}, -1.0);
    m.drift = {b1, b2};
    MvPoly s11(2);
    s11.add_term({0, 0}, 0.5);
    s11.add_term({0, 1}, 0.1);
    MvPoly s22(2);
    s22.add_term({0, 0}, 0.3);
    s22.add_term({1, 0}, 0.1);
    s22.add_term({0, 2}, 0.1);
    m.diffusion = {{s11, zero2(2)}, {zero2(2), s22}};
    m.initial.components = {DistComponent::gaussian(0.3, 0.2 * 0.2),
                            DistComponent::gaussian(0.5, 1.2 * 1.2)};
    m.validate();
    return m;
}

// Triad system; state ordering (u, w, v) following the equations.
ModelSpec make_ex43(const std::map<std::string, double>& ov, int case_id) {
    std::map<std::string, double> used;
    ModelSpec m;
    m.dim = 3;
    m.noise_dim = 3;
    double g1, g2, g3, l12, l13, l23, be1, be2, be3, s1, s2, s3;
    if (case_id == 1) {
        m.name = "ex43_case1";
        g1 = take(ov, used, "gamma_1", 0.4);
        g2 = take(ov, used, "gamma_2", 2.0);
        g3 = take(ov, used, "gamma_3", 2.0);
        l12 = take(ov, used, "lambda_12", 0.03);
        l13 = take(ov, used, "lambda_13", 0.06);
        l23 = take(ov, used, "lambda_23", 0.09);
        be1 = take(ov, used, "beta_1", 2.0);
        be2 = take(ov, used, "beta_2", -1.0);
        be3 = take(ov, used, "beta_3", -1.0);
        s1 = take(ov, used, "sigma_1", std::sqrt(0.8));
        s2 = take(ov, used, "sigma_2", 2.0);
        s3 = take(ov, used, "sigma_3", 2.0);
        m.initial.components = {DistComponent::gaussian(-1.0, 0.25),
                                DistComponent::gaussian(0.5, 2.0),
                                DistComponent::gaussian(-0.5, 0.0225)};
        m.default_T = take(ov, used, "T", 20.0);
        m.default_h = take(ov, used, "h", 0.01);
    } else {
        m.name = "ex43_case2";
        g1 = take(ov, used, "gamma_1", 0.9);
        g2 = take(ov, used, "gamma_2", 1.2);
        g3 = take(ov, used, "gamma_3", 1.5);
        l12 = take(ov, used, "lambda_12", 0.1);
        l13 = take(ov, used, "lambda_13", 0.1);
        l23 = take(ov, used, "lambda_23", 0.1);
        be1 = take(ov, used, "beta_1", 1.2);
        be2 = take(ov, used, "beta_2", 0.6);
        be3 = take(ov, used, "beta_3", -1.8);
        // sigma_i from the stated energies sigma_i^2 / (2 gamma_i)
        s1 = take(ov, used, "sigma_1", std::sqrt(2.0 * g1 * 0.6));
        s2 = take(ov, used, "sigma_2", std::sqrt(2.0 * g2 * 0.4));
        s3 = take(ov, used, "sigma_3", std::sqrt(2.0 * g3 * 0.3));
        m.initial.components = {DistComponent::gaussian(-0.5, 0.09),
                                DistComponent::gaussian(0.2, 0.09),
                                DistComponent::gaussian(0.5, 0.04)};
        m.default_T = take(ov, used, "T", 8.0);
        m.default_h = take(ov, used, "h", 0.005);
    }
    check_used(m.name, ov, used);
    if (std::abs(be1 + be2 + be3) > 1e-12)
        throw config_error("triad coefficients must satisfy beta_1 + beta_2 + beta_3 = 0");

    // du = (-g1 u + l12 w + l13 v + be1 v w) dt + s1 dW_u
    MvPoly b1(3);
    b1.add_term({1, 0, 0}, -g1);
    b1.add_term({0, 1, 0}, l12);
    b1.add_term({0, 0, 1}, l13);
    b1.add_term({0, 1, 1}, be1);
    // dw = (-g2 w - l12 u + l23 v + be2 u v) dt + s2 dW_w
    MvPoly b2(3);
    b2.add_term({0, 1, 0}, -g2);
    b2.add_term({1, 0, 0}, -l12);
    b2.add_term({0, 0, 1}, l23);
    b2.add_term({1, 0, 1}, be2);
    // dv = (-g3 v - l13 u - l23 w + be3 w u) dt + s3 dW_v
    MvPoly b3(3);
    b3.add_term({0, 0, 1}, -g3);
    b3.add_term({1, 0, 0}, -l13);
    b3.add_term({0, 1, 0}, -l23);
    b3.add_term({1, 1, 0}, be3);
    m.drift = {b1, b2, b3};
    m.diffusion.assign(3, std::vector<MvPoly>(3, MvPoly(3)));
    m.diffusion[0][0] = MvPoly::constant(3, s1);
    m.diffusion[1][1] = MvPoly::constant(3, s2);
    m.diffusion[2][2] = MvPoly::constant(3, s3);
    m.validate();
    return m;
}

ModelSpec make_lorenz96(const std::map<std::string, double>& ov) {
    std::map<std::string, double> used;
    ModelSpec m;
    m.name = "lorenz96";
    const int d = static_cast<int>(take(ov, used, "d", 6.0));
    if (d < 3) throw config_error("lorenz96 needs d >= 3");
    const double F = take(ov, used, "F", 0.9);
    const double sigma = take(ov, used, "sigma", 0.08);
    const double init_var = take(ov, used, "init_var", 0.09);
    const double init_mean = take(ov, used, "init_mean", 0.0);
    m.default_T = take(ov, used, "T", 25.0);
    m.default_h = take(ov, used, "h", 0.01);
    check_used(m.name, ov, used);

    m.dim = d;
    m.noise_dim = d;
    m.drift.reserve(d);
    for (int k = 0; k < d; ++k) {
        const int kp1 = (k + 1) % d;
        const int km1 = (k - 1 + d) % d;
        const int km2 = (k - 2 + d) % d;
        MvPoly b(d);
        // (X_{k+1} - X_{k-2}) X_{k-1} - X_k + F
        MultiIndex t1(d, 0);
        t1[kp1] += 1;
        t1[km1] += 1;
        b.add_term(t1, 1.0);
        MultiIndex t2(d, 0);
        t2[km2] += 1;
        t2[km1] += 1;
        b.add_term(t2, -1.0);
        MultiIndex t3(d, 0);
        t3[k] = 1;
        b.add_term(t3, -1.0);
        b.add_term(MultiIndex(d, 0), F);
        m.drift.push_back(b);
    }
    m.diffusion.assign(d, std::vector<MvPoly>(d, MvPoly(d)));
    for (int k = 0; k < d; ++k) m.diffusion[k][k] = MvPoly::constant(d, sigma);
    m.initial.components.assign(d, DistComponent::gaussian(init_mean, init_var));
    m.validate();
    return m;
}

}  // namespace

ModelSpec build_example(const std::string& name, const std::map<std::string, double>& overrides) {
    if (name == "ex41") return make_ex41(overrides, false);
    if (name == "ex41_random_coeff") return make_ex41(overrides, true);
    if (name == "ex42") return make_ex42(overrides);
    if (name == "ex43_case1") return make_ex43(overrides, 1);
    if (name == "ex43_case2") return make_ex43(overrides, 2);
    if (name == "lorenz96") return make_lorenz96(overrides);
    throw config_error("unknown example model '" + name + "'");
}

ModelSpec augment_parameter(const ModelSpec& model, const DistComponent& dist) {
    model.validate();
    ModelSpec out;
    out.name = model.name + "+param";
    out.dim = model.dim + 1;
    out.noise_dim = model.noise_dim;
    out.default_T = model.default_T;
    out.default_h = model.default_h;
    if (model.param_drift) {
        if (static_cast<int>(model.param_drift->size()) != model.dim)
            throw config_error("param_drift must match the model dimension");
        out.drift = *model.param_drift;
        for (const auto& p : out.drift)
            if (p.dimension() != out.dim)
                throw dimension_error("param_drift polynomials must use d+1 variables");
    } else {
        out.drift.reserve(out.dim);
        for (const auto& p : model.drift) out.drift.push_back(poly_lift(p, out.dim));
    }
    out.drift.push_back(MvPoly(out.dim));  // d xi = 0
    out.diffusion.reserve(out.dim);
    for (const auto& row : model.diffusion) {
        std::vector<MvPoly> lifted;
        lifted.reserve(row.size());
        for (const auto& p : row) lifted.push_back(poly_lift(p, out.dim));
        out.diffusion.push_back(std::move(lifted));
    }
    out.diffusion.emplace_back(model.noise_dim, MvPoly(out.dim));  // zero diffusion row
    out.initial = model.initial;
    out.initial.components.push_back(dist);
    out.copies = model.copies;
    out.validate();
    return out;
}

ModelSpec augment_initial_copy(const ModelSpec& model, int source, double jitter_sd) {
    model.validate();
    if (source < 0 || source >= model.dim) throw config_error("copy source out of range");
    for (const auto& link : model.copies)
        if (link.source == source || link.target == source)
            throw config_error("component already participates in a copy link");
    if (model.initial.components[source].kind != DistComponent::Kind::Gaussian &&
        model.initial.components[source].kind != DistComponent::Kind::Uniform)
        throw config_error("copy source must be a random component");
    ModelSpec out;
    out.name = model.name + "+copy";
    out.dim = model.dim + 1;
    out.noise_dim = model.noise_dim;
    out.default_T = model.default_T;
    out.default_h = model.default_h;
    out.drift.reserve(out.dim);
    for (const auto& p : model.drift) out.drift.push_back(poly_lift(p, out.dim));
    out.drift.push_back(MvPoly(out.dim));
    for (const auto& row : model.diffusion) {
        std::vector<MvPoly> lifted;
        lifted.reserve(row.size());
        for (const auto& p : row) lifted.push_back(poly_lift(p, out.dim));
        out.diffusion.push_back(std::move(lifted));
    }
    out.diffusion.emplace_back(model.noise_dim, MvPoly(out.dim));
    out.initial = model.initial;
    const auto& src = model.initial.components[source];
    out.initial.components.push_back(
        DistComponent::gaussian(src.mean(), src.variance() + jitter_sd * jitter_sd));
    out.copies = model.copies;
    out.copies.push_back(CopyLink{model.dim, source, jitter_sd});
    out.validate();
    return out;
}

std::vector<std::vector<MvPoly>> diffusion_covariance(const ModelSpec& model) {
    std::vector<std::vector<MvPoly>> cov(model.dim, std::vector<MvPoly>(model.dim, MvPoly(model.dim)));
    for (int i = 0; i < model.dim; ++i)
        for (int l = i; l < model.dim; ++l) {
            MvPoly s(model.dim);
            for (int j = 0; j < model.noise_dim; ++j)
                s = s + poly_mul(model.diffusion[i][j], model.diffusion[l][j]);
            cov[i][l] = s;
            cov[l][i] = s;
        }
    return cov;
}

ReducedModel fold_constant_components(const ModelSpec& model) {
    model.validate();
    ReducedModel out;
    std::vector<bool> fold(model.dim, false);
    for (int i = 0; i < model.dim; ++i) {
        if (model.initial.components[i].kind != DistComponent::Kind::Constant) continue;
        if (!model.drift[i].is_zero()) continue;
        bool zero_row = true;
        for (const auto& p : model.diffusion[i]) zero_row = zero_row && p.is_zero();
        if (!zero_row) continue;
        bool in_copy = false;
        for (const auto& link : model.copies)
            in_copy = in_copy || link.source == i || link.target == i;
        if (in_copy) continue;
        fold[i] = true;
        out.folded.emplace_back(i, model.initial.components[i].a);
    }
    if (out.folded.empty()) {
        out.model = model;
        out.kept.resize(model.dim);
        for (int i = 0; i < model.dim; ++i) out.kept[i] = i;
        return out;
    }
    std::vector<int> new_index(model.dim, -1);
    for (int i = 0; i < model.dim; ++i)
        if (!fold[i]) {
            new_index[i] = static_cast<int>(out.kept.size());
            out.kept.push_back(i);
        }
    const int dred = static_cast<int>(out.kept.size());
    if (dred == 0) throw config_error("model has no random components after folding constants");

    auto project = [&](const MvPoly& p) {
        MvPoly q(dred);
        for (const auto& [alpha, c] : p.terms()) {
            MultiIndex beta(dred, 0);
            double scale = c;
            for (int i = 0; i < model.dim; ++i) {
                if (fold[i]) {
                    const double v = model.initial.components[i].a;
                    for (int e = 0; e < alpha[i]; ++e) scale *= v;
                } else {
                    beta[new_index[i]] = alpha[i];
                }
            }
            q.add_term(beta, scale);
        }
        return q;
    };

    out.model.name = model.name + "(reduced)";
    out.model.dim = dred;
    out.model.noise_dim = model.noise_dim;
    out.model.default_h = model.default_h;
    out.model.default_T = model.default_T;
    for (int i = 0; i < model.dim; ++i) {
        if (fold[i]) continue;
        out.model.drift.push_back(project(model.drift[i]));
        std::vector<MvPoly> row;
        for (const auto& p : model.diffusion[i]) row.push_back(project(p));
        out.model.diffusion.push_back(std::move(row));
        out.model.initial.components.push_back(model.initial.components[i]);
    }
    for (const auto& link : model.copies)
        out.model.copies.push_back(
            CopyLink{new_index[link.target], new_index[link.source], link.jitter_sd});
    out.model.validate();
    return out;
}

std::vector<double> inflate_moments(const ReducedModel& reduced, int full_dim, int order,
                                    const std::vector<double>& reduced_moments) {
    if (reduced.folded.empty()) return reduced_moments;
    const GradedBasis full(full_dim, order);
    const GradedBasis red(reduced.model.dim, order);
    std::vector<double> values(full.size(), 0.0);
    std::vector<double> fold_value(full_dim, 0.0);
    std::vector<bool> is_folded(full_dim, false);
    for (const auto& [idx, v] : reduced.folded) {
        is_folded[idx] = true;
        fold_value[idx] = v;
    }
    for (std::size_t p = 0; p < full.size(); ++p) {
        const MultiIndex& g = full.at(p);
        MultiIndex gk(reduced.model.dim, 0);
        double scale = 1.0;
        for (int i = 0; i < full_dim; ++i) {
            if (is_folded[i]) {
                for (int e = 0; e < g[i]; ++e) scale *= fold_value[i];
            }
        }
        for (std::size_t k = 0; k < reduced.kept.size(); ++k) gk[k] = g[reduced.kept[k]];
        values[p] = scale * reduced_moments[red.position(gk)];
    }
    return values;
}

MomentTable initial_moment_table(const ModelSpec& model, int max_order) {
    model.validate();
    if (model.copies.empty()) return initial_moments(model.initial, max_order);

    MomentTable table(model.dim, max_order);
    std::vector<int> copy_of(model.dim, -1);   // target -> source
    std::vector<double> jitter(model.dim, 0.0);
    for (const auto& link : model.copies) {
        copy_of[link.target] = link.source;
        jitter[link.target] = link.jitter_sd;
    }
    const auto& gb = table.basis();
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const MultiIndex& g = gb.at(p);
        double v = 1.0;
        for (int i = 0; i < model.dim; ++i) {
            if (copy_of[i] >= 0) continue;  // handled with its source below
            int copy_exp = 0;
            double s = 0.0;
            for (const auto& link : model.copies)
                if (link.source == i) {
                    copy_exp = g[link.target];
                    s = link.jitter_sd;
                }
            if (copy_exp == 0) {
                v *= model.initial.components[i].raw_moment(g[i]);
                continue;
            }
            // E[X^a (X + s Z)^b] = sum_k C(b,k) s^k E[Z^k] E[X^{a+b-k}]
            double acc = 0.0;
            double binom = 1.0;
            double s_pow = 1.0;
            for (int k = 0; k <= copy_exp; ++k) {
                const double gz = gaussian_increment_moment(k);
                if (gz != 0.0)
                    acc += binom * s_pow * gz *
                           model.initial.components[i].raw_moment(g[i] + copy_exp - k);
                binom = binom * (copy_exp - k) / (k + 1);
                s_pow *= s;
            }
            v *= acc;
        }
        table.at(p) = v;
    }
    return table;
}

}  // namespace rpcsde
