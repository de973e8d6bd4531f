#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rpcsde/orthopoly.hpp"
#include "rpcsde/polyalg.hpp"

using namespace rpcsde;

TEST_CASE("product worked examples") {
    MvPoly p(1), q(1);
    p.add_term({0}, 1.0);
    p.add_term({1}, 1.0);
    q.add_term({0}, 1.0);
    q.add_term({1}, -1.0);
    const MvPoly pq = poly_mul(p, q);  // 1 - x^2
    CHECK(pq.coeff({0}) == doctest::Approx(1.0));
    CHECK(pq.coeff({1}) == doctest::Approx(0.0));
    CHECK(pq.coeff({2}) == doctest::Approx(-1.0));

    CHECK(poly_mul(p, MvPoly(1)).is_zero());

    MvPoly s(2);
    s.add_term({1, 0}, 1.0);
    s.add_term({0, 1}, 1.0);
    const MvPoly s2 = poly_mul(s, s);  // x1^2 + 2 x1 x2 + x2^2
    CHECK(s2.coeff({2, 0}) == doctest::Approx(1.0));
    CHECK(s2.coeff({1, 1}) == doctest::Approx(2.0));
    CHECK(s2.coeff({0, 2}) == doctest::Approx(1.0));
    CHECK(s2.degree() == 2);
}

TEST_CASE("derivative worked examples") {
    MvPoly p(2);
    p.add_term({2, 1}, 1.0);
    const MvPoly d1 = poly_diff(p, 0);
    CHECK(d1.coeff({1, 1}) == doctest::Approx(2.0));

    MvPoly q(2);
    q.add_term({1, 0}, 1.0);
    CHECK(poly_diff(q, 1).is_zero());

    MvPoly r(1);
    r.add_term({3}, 3.0);
    CHECK(poly_diff(r, 0).coeff({2}) == doctest::Approx(9.0));
    CHECK_THROWS_AS(poly_diff(r, 1), dimension_error);
}

TEST_CASE("product evaluation property on random points") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    for (int d = 1; d <= 3; ++d) {
        GradedBasis gb(d, 3);
        for (int rep = 0; rep < 20; ++rep) {
            MvPoly p(d), q(d);
            for (std::size_t k = 0; k < gb.size(); ++k) {
                p.add_term(gb.at(k), coeff(rng));
                q.add_term(gb.at(k), coeff(rng));
            }
            const MvPoly pq = poly_mul(p, q);
            CHECK(pq.degree() == p.degree() + q.degree());
            std::vector<double> x(d);
            for (int rep2 = 0; rep2 < 5; ++rep2) {
                for (auto& xi : x) xi = point(rng);
                const double want = poly_eval(p, x) * poly_eval(q, x);
                CHECK(poly_eval(pq, x) ==
                      doctest::Approx(want).epsilon(1e-12).scale(std::abs(want) + 1.0));
            }
        }
    }
}

TEST_CASE("gaussian increment moments") {
    CHECK(gaussian_increment_moment(0) == 1.0);
    CHECK(gaussian_increment_moment(1) == 0.0);
    CHECK(gaussian_increment_moment(2) == 1.0);
    CHECK(gaussian_increment_moment(6) == 15.0);
    CHECK(gaussian_increment_moment(8) == 105.0);
}

TEST_CASE("initial moment worked examples") {
    InitialDistribution d;
    d.components = {DistComponent::gaussian(0.0, 1.0)};
    CHECK(initial_moments(d, 4).get({4}) == doctest::Approx(3.0));

    d.components = {DistComponent::gaussian(1.3, 0.49)};
    CHECK(initial_moments(d, 2).get({2}) == doctest::Approx(1.3 * 1.3 + 0.49));

    d.components = {DistComponent::uniform(0.1, 1.1)};
    CHECK(initial_moments(d, 2).get({2}) ==
          doctest::Approx((1.331 - 0.001) / 3.0).epsilon(1e-14));

    d.components = {DistComponent::constant(2.0), DistComponent::gaussian(0.0, 1.0)};
    const MomentTable m = initial_moments(d, 4);
    CHECK(m.get({2, 2}) == doctest::Approx(4.0));
    CHECK(m.get({0, 0}) == doctest::Approx(1.0));
    CHECK(m.get({3, 0}) == doctest::Approx(8.0));
}

TEST_CASE("gaussian initial moments match a large-sample Monte Carlo estimate") {
    const double mu = 0.7, var = 0.81;
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> normal(mu, std::sqrt(var));
    const int n = 1000000;
    std::vector<double> sums(7, 0.0), sq(7, 0.0);
    for (int i = 0; i < n; ++i) {
        const double x = normal(rng);
        double p = 1.0;
        for (int k = 0; k <= 6; ++k) {
            sums[k] += p;
            sq[k] += p * p;
            p *= x;
        }
    }
    InitialDistribution d;
    d.components = {DistComponent::gaussian(mu, var)};
    const MomentTable m = initial_moments(d, 6);
    for (int k = 1; k <= 6; ++k) {
        const double mean = sums[k] / n;
        const double se = std::sqrt((sq[k] / n - mean * mean) / n);
        CHECK(std::abs(m.get({k}) - mean) < 4.0 * se);
    }
}

TEST_CASE("canonical form drops tiny coefficients") {
    MvPoly p(1);
    p.add_term({1}, 1.0);
    p.add_term({1}, -1.0);
    CHECK(p.is_zero());
    CHECK(p.degree() == -1);
}

TEST_CASE("lift keeps values on the embedded coordinates") {
    MvPoly p(2);
    p.add_term({1, 2}, 3.0);
    const MvPoly q = poly_lift(p, 4);
    CHECK(q.dimension() == 4);
    CHECK(q.coeff({1, 2, 0, 0}) == doctest::Approx(3.0));
}
