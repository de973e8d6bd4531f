#include <cmath>
#include <cstdio>
#include <functional>

#include "rpcsde/clidiag.hpp"
#include "rpcsde/prpc.hpp"

namespace rpcsde {

namespace {

ModelSpec scalar_ou() {
    ModelSpec m;
    m.name = "ou";
    m.dim = 1;
    m.noise_dim = 1;
    MvPoly b(1);
    b.add_term({1}, -1.0);
    m.drift = {b};
    m.diffusion = {{MvPoly::constant(1, 1.0)}};
    m.initial.components = {DistComponent::gaussian(0.0, 1.0)};
    m.default_h = 0.01;
    m.default_T = 1.0;
    return m;
}

}  // namespace

int selftest(bool verbose) {
    int failures = 0;
    auto check = [&](const char* name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string detail;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            detail = e.what();
        }
        if (verbose || !ok)
            std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : ": ",
                        detail.c_str());
        if (!ok) ++failures;
    };

    check("graded enumeration d=2 L=2", [] {
        GradedBasis gb(2, 2);
        const std::vector<MultiIndex> want = {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
        return gb.indices() == want && gb.position({1, 1}) == 4 && gb.position({2, 0}) == 5;
    });

    check("multinomial coefficients", [] {
        return multinomial({2}, {{1}, {1}}) == 2 &&
               multinomial({2, 1}, {{1, 0}, {1, 1}}) == 2 && multinomial({3}, {{3}}) == 1;
    });

    check("gaussian and uniform moments", [] {
        const auto g = DistComponent::gaussian(0.0, 1.0);
        const auto u = DistComponent::uniform(0.1, 1.1);
        return std::abs(g.raw_moment(4) - 3.0) < 1e-14 &&
               std::abs(u.raw_moment(2) - (1.331 - 0.001) / 3.0) < 1e-14;
    });

    check("standard normal Hankel and spectrum", [] {
        InitialDistribution d;
        d.components = {DistComponent::gaussian(0.0, 1.0)};
        const MomentTable m = initial_moments(d, 4);
        const auto h = hankel_matrix(m, 2);
        const std::vector<double> want = {1, 0, 1, 0, 1, 0, 1, 0, 3};
        for (std::size_t i = 0; i < 9; ++i)
            if (std::abs(h[i] - want[i]) > 1e-14) return false;
        const auto [lo, hi] = hankel_spectrum_bounds(m, 2);
        return std::abs(lo - (2.0 - std::sqrt(2.0))) < 1e-10 &&
               std::abs(hi - (2.0 + std::sqrt(2.0))) < 1e-10;
    });

    check("Hermite triple product", [] {
        InitialDistribution d;
        d.components = {DistComponent::gaussian(0.0, 1.0)};
        const MomentTable m = initial_moments(d, 6);
        const auto basis = basis_from_moments(m, 2);
        const auto t = triple_products(basis, m, 2);
        return std::abs(t.get(1, 1, 2) - std::sqrt(2.0)) < 1e-10 &&
               std::abs(t.get(1, 1, 1)) < 1e-12 && std::abs(t.get(0, 2, 2) - 1.0) < 1e-12;
    });

    check("moment metric worked examples", [] {
        MomentTable a(1, 3), b(1, 3);
        a.set({0}, 1.0); a.set({1}, 0.0); a.set({2}, 1.0); a.set({3}, 0.0);
        b = a;
        b.set({2}, 1.1);
        const double d1 = moment_metric(a, b, 2);
        b.set({2}, 1.0);
        b.set({3}, 0.6);
        const double d2 = moment_metric(a, b, 3);
        return std::abs(d1 - 0.05) < 1e-14 && std::abs(d2 - 0.1) < 1e-14;
    });

    check("W1 bound worked examples", [] {
        MomentTable a(1, 20), b(1, 20);
        for (int n = 0; n <= 20; ++n) {
            const double v = DistComponent::gaussian(0.0, 0.1).raw_moment(n);
            a.set({n}, v);
            b.set({n}, v);
        }
        const double zero_gap = w1_moment_bound(a, b, 1.0, 10, 1);
        const double halved = w1_moment_bound(a, b, 1.0, 20, 1);
        MomentTable c = a;
        c.set({1}, a.get({1}) + 0.01);
        const double with_gap = w1_moment_bound(a, c, 1.0, 2, 1);
        const double expect = 18.0 + std::sqrt(1.0 + std::sqrt(2.0)) * 9.0 * 0.01;
        return std::abs(zero_gap - 3.6) < 1e-12 && std::abs(halved - 1.8) < 1e-12 &&
               std::abs(with_gap - expect) < 1e-12;
    });

    check("mRPC single step on OU", [] {
        const ModelSpec ou = scalar_ou();
        MrpcConfig cfg;
        cfg.L = 2;
        cfg.S = 1;
        cfg.h = 0.01;
        cfg.T = 0.01;
        const MrpcState s0 = mrpc_init(ou, cfg);
        const MrpcState s1 = mrpc_step(s0, ou, cfg);
        return std::abs(s1.moments.get({2}) - (1.0 - cfg.h)) < 1e-14 &&
               std::abs(s1.moments.get({0}) - 1.0) < 1e-15;
    });

    check("pRPC matches mRPC on one OU step", [] {
        const ModelSpec ou = scalar_ou();
        MrpcConfig cfg;
        cfg.L = 2;
        cfg.S = 2;
        cfg.h = 0.01;
        cfg.T = 0.01;
        const MrpcState ms = mrpc_step(mrpc_init(ou, cfg), ou, cfg);
        const PrpcState ps = prpc_step(prpc_init(ou, cfg), ou, cfg);
        const MomentTable pm = prpc_moments(ps, 2);
        return std::abs(pm.get({2}) - ms.moments.get({2})) < 1e-12 &&
               std::abs(pm.get({1}) - ms.moments.get({1})) < 1e-12;
    });

    check("macro observables", [] {
        InitialDistribution d;
        d.components.assign(6, DistComponent::gaussian(0.0, 1.0));
        const auto [e0, v0] = macro_observables(initial_moments(d, 2));
        d.components.assign(6, DistComponent::constant(1.0));
        const auto [e1, v1] = macro_observables(initial_moments(d, 2));
        return std::abs(e0 - 0.0) < 1e-14 && std::abs(v0 - 6.0) < 1e-12 &&
               std::abs(e1 - 3.0) < 1e-14 && std::abs(v1 - 0.0) < 1e-12;
    });

    check("exponential cumulants", [] {
        MomentTable m(1, 4);
        m.set({1}, 1.0);
        m.set({2}, 2.0);
        m.set({3}, 6.0);
        m.set({4}, 24.0);
        const Cumulants c = cumulants_from_moments(m, 0);
        return std::abs(c.skewness - 2.0) < 1e-12 && std::abs(c.excess_kurtosis - 6.0) < 1e-12;
    });

    check("MC determinism across thread counts", [] {
        const ModelSpec ou = scalar_ou();
        McConfig mc;
        mc.paths = 2000;
        mc.seed = 7;
        mc.antithetic = true;
        mc.h_ref = 0.01;
        mc.record_every = 10;
        mc.moment_order = 2;
        mc.threads = 1;
        const SampleStats a = mc_simulate(ou, mc, 0.5);
        mc.threads = 2;
        const SampleStats b = mc_simulate(ou, mc, 0.5);
        if (a.moments.size() != b.moments.size()) return false;
        for (std::size_t r = 0; r < a.moments.size(); ++r)
            for (std::size_t p = 0; p < a.moments[r].size(); ++p)
                if (a.moments[r][p] != b.moments[r][p]) return false;
        return true;
    });

    if (verbose) std::printf("%s (%d failure%s)\n", failures ? "SELFTEST FAILED" : "SELFTEST OK",
                             failures, failures == 1 ? "" : "s");
    return failures;
}

}  // namespace rpcsde
