#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rpcsde/mrpc.hpp"
#include "step_oracle.hpp"

using namespace rpcsde;

namespace {

ModelSpec scalar_ou(double rate = 1.0, double sigma = 1.0) {
    ModelSpec m;
    m.name = "ou";
    m.dim = 1;
    m.noise_dim = 1;
    MvPoly b(1);
    b.add_term({1}, -rate);
    m.drift = {b};
    m.diffusion = {{MvPoly::constant(1, sigma)}};
    m.initial.components = {DistComponent::gaussian(0.0, 1.0)};
    return m;
}

ModelSpec pure_diffusion() {
    ModelSpec m;
    m.name = "diffusion";
    m.dim = 1;
    m.noise_dim = 1;
    m.drift = {MvPoly(1)};
    m.diffusion = {{MvPoly::constant(1, 1.0)}};
    m.initial.components = {DistComponent::gaussian(0.0, 1.0)};
    return m;
}

MrpcConfig make_cfg(int L, int S, double h, double T,
                    TensorMode mode = TensorMode::Sparse) {
    MrpcConfig cfg;
    cfg.L = L;
    cfg.S = S;
    cfg.h = h;
    cfg.T = T;
    cfg.mode = mode;
    return cfg;
}

}  // namespace

TEST_CASE("initialization carries the initial moments") {
    const MrpcConfig cfg = make_cfg(2, 1, 0.01, 1.0);
    const MrpcState s = mrpc_init(scalar_ou(), cfg);
    const std::vector<double> want = {1, 0, 1, 0, 3, 0};  // N(0,1) orders 0..5
    REQUIRE(s.moments.values().size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(s.moments.at(i) == doctest::Approx(want[i]));

    ModelSpec c = scalar_ou();
    c.initial.components = {DistComponent::constant(0.5)};
    const MrpcState sc = mrpc_init(c, cfg);
    for (int n = 0; n <= 5; ++n)
        CHECK(sc.moments.get({n}) == doctest::Approx(std::pow(0.5, n)));

    const ModelSpec ex41 = build_example("ex41");
    CHECK(ex41.initial.components[0].variance() == doctest::Approx(0.02604166666666667));
    CHECK(ex41.initial.components[1].variance() == doctest::Approx(0.0625));
}

TEST_CASE("degree feasibility checks") {
    ModelSpec cubic = scalar_ou();
    MvPoly b(1);
    b.add_term({3}, -1.0);
    cubic.drift = {b};
    CHECK_THROWS_AS(mrpc_init(cubic, make_cfg(2, 1, 0.01, 1.0)), degree_error);
    CHECK_NOTHROW(mrpc_init(cubic, make_cfg(2, 2, 0.01, 1.0)));    // feasible, warned
    CHECK(check_model_degrees(cubic, 3));                          // strict bound met
    CHECK_FALSE(check_model_degrees(cubic, 2));                    // run allowed, warned
}

TEST_CASE("single step worked examples") {
    SUBCASE("OU second moment: 1 - h") {
        const MrpcConfig cfg = make_cfg(2, 1, 0.01, 1.0);
        const ModelSpec ou = scalar_ou();
        const MrpcState s1 = mrpc_step(mrpc_init(ou, cfg), ou, cfg);
        CHECK(s1.moments.get({2}) == doctest::Approx(1.0 - cfg.h).epsilon(1e-14));
        CHECK(s1.moments.get({0}) == 1.0);
    }
    SUBCASE("pure diffusion: m2 grows by h, mean stays zero") {
        const MrpcConfig cfg = make_cfg(2, 0, 0.01, 1.0);
        const ModelSpec pd = pure_diffusion();
        const MrpcState s1 = mrpc_step(mrpc_init(pd, cfg), pd, cfg);
        CHECK(s1.moments.get({2}) == doctest::Approx(1.0 + cfg.h).epsilon(1e-14));
        CHECK(s1.moments.get({1}) == doctest::Approx(0.0).scale(1.0));
    }
}

TEST_CASE("normalization is preserved exactly over a run") {
    const MrpcConfig cfg = make_cfg(2, 2, 0.01, 1.0);
    const ModelSpec ou = scalar_ou();
    const RunResult r = mrpc_run(ou, cfg);
    REQUIRE(r.status == 0);
    for (const auto& rec : r.records) CHECK(rec.moments[0] == 1.0);
}

TEST_CASE("linear models update the mean exactly by (I + hA)") {
    ModelSpec m;
    m.dim = 2;
    m.noise_dim = 1;
    MvPoly b1(2), b2(2);
    b1.add_term({1, 0}, -0.7);
    b1.add_term({0, 1}, 0.3);
    b2.add_term({1, 0}, 0.2);
    b2.add_term({0, 1}, -1.1);
    m.drift = {b1, b2};
    m.diffusion = {{MvPoly::constant(2, 0.5)}, {MvPoly::constant(2, 0.4)}};
    m.initial.components = {DistComponent::gaussian(1.0, 0.3), DistComponent::gaussian(-2.0, 0.5)};
    const MrpcConfig cfg = make_cfg(2, 1, 0.02, 1.0);
    const MrpcState s1 = mrpc_step(mrpc_init(m, cfg), m, cfg);
    const double mu1 = 1.0, mu2 = -2.0;
    CHECK(s1.moments.get({1, 0}) ==
          doctest::Approx(mu1 + cfg.h * (-0.7 * mu1 + 0.3 * mu2)).epsilon(1e-14));
    CHECK(s1.moments.get({0, 1}) ==
          doctest::Approx(mu2 + cfg.h * (0.2 * mu1 - 1.1 * mu2)).epsilon(1e-14));
}

TEST_CASE("one-step oracle equivalence across the example models") {
    struct Case {
        ModelSpec model;
        int L;
    };
    std::vector<Case> cases;
    for (int L : {1, 2}) {
        cases.push_back({build_example("ex41"), L});
        cases.push_back({build_example("ex42"), L});
        cases.push_back({build_example("ex43_case1"), L});
        cases.push_back({build_example("ex43_case2"), L});
        cases.push_back({build_example("ex41_random_coeff"), L});
        cases.push_back({build_example("lorenz96", {{"d", 3.0}}), L});
    }
    for (const auto& c : cases) {
        const int S = std::max(c.model.max_drift_degree(), 2 * c.model.max_diffusion_degree());
        for (double h : {0.01, 0.001}) {
            const MrpcConfig cfg = make_cfg(c.L, S, h, h);
            const MrpcState s0 = mrpc_init(c.model, cfg);
            const MrpcState s1 = mrpc_step(s0, c.model, cfg);

            // the oracle shares the stepper's expectation calculus and the
            // same moment table; everything else is brute force
            const MrpcCalculus calc(s0.moments, cfg);
            const testing::OraclePrimitives expect{
                [&](const MultiIndex& g) { return calc.expect_raw_monomial(g); },
                [&](const MultiIndex& mu, int i) {
                    return calc.expect_raw_times(mu, c.model.drift[i]);
                },
                [&](const MultiIndex& mu, int i, int l, int j) {
                    return calc.expect_raw_times_pair(mu, c.model.diffusion[i][j],
                                                      c.model.diffusion[l][j]);
                }};
            const GradedBasis& gb = s0.moments.basis();
            for (std::size_t p = 0; p < gb.size(); ++p) {
                const double want = testing::oracle_moment_update(c.model, h, gb.at(p), expect);
                CHECK(std::abs(s1.moments.at(p) - want) < 1e-8);
            }
        }
    }
}

TEST_CASE("long OU run approaches the stationary variance") {
    const ModelSpec ou = scalar_ou(1.0, 1.0);
    const MrpcConfig cfg = make_cfg(2, 2, 0.01, 10.0);
    const RunResult r = mrpc_run(ou, cfg);
    REQUIRE(r.status == 0);
    const GradedBasis gb(1, cfg.moment_order());
    const double m2 = r.records.back().moments[gb.position({2})];
    CHECK(std::abs(m2 - 0.5) < 2e-2);
}

TEST_CASE("run composition: one step of a run equals mrpc_step") {
    const ModelSpec ou = scalar_ou();
    const MrpcConfig cfg = make_cfg(2, 2, 0.01, 0.01);
    const RunResult r = mrpc_run(ou, cfg);
    const MrpcState s1 = mrpc_step(mrpc_init(ou, cfg), ou, cfg);
    REQUIRE(r.records.size() == 2);
    for (std::size_t i = 0; i < s1.moments.values().size(); ++i)
        CHECK(r.records[1].moments[i] == doctest::Approx(s1.moments.at(i)).epsilon(1e-15));
}

TEST_CASE("sparse and full modes agree on ex41 at L=2") {
    const ModelSpec ex41 = build_example("ex41");
    const MrpcConfig sparse = make_cfg(2, 2, 0.012, 3.0, TensorMode::Sparse);
    const MrpcConfig full = make_cfg(2, 2, 0.012, 3.0, TensorMode::Full);
    const RunResult rs = mrpc_run(ex41, sparse);
    const RunResult rf = mrpc_run(ex41, full);
    REQUIRE(rs.status == 0);
    REQUIRE(rf.status == 0);
    REQUIRE(rs.records.size() == rf.records.size());
    const GradedBasis shared(2, 2 * 2 + 2);
    for (std::size_t r = 0; r < rs.records.size(); ++r)
        for (std::size_t p = 0; p < shared.size(); ++p)
            CHECK(std::abs(rs.records[r].moments[p] - rf.records[r].moments[p]) < 1e-6);
}

TEST_CASE("non-integer step counts are rejected") {
    const ModelSpec ou = scalar_ou();
    MrpcConfig cfg = make_cfg(2, 2, 0.012, 1.0);
    CHECK_THROWS_AS(mrpc_run(ou, cfg), config_error);
}

TEST_CASE("over-conditioned degree fails with a singular Hankel") {
    // at L = 8 the growing tails of u degrade the Hankel conditioning until a
    // pivot crosses the floor (empirically near t = 1.5)
    const ModelSpec ex41 = build_example("ex41");
    const MrpcConfig cfg = make_cfg(8, 2, 0.012, 3.0);
    const RunResult r = mrpc_run(ex41, cfg);
    CHECK(r.status == 3);
    CHECK(r.failure_step > 0);
    CHECK(!r.error.empty());
    CHECK(!r.records.empty());  // partial history retained
}
