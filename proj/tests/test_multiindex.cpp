#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rpcsde/multiindex.hpp"

using namespace rpcsde;

namespace {

std::uint64_t factorial(int n) {
    std::uint64_t r = 1;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

}  // namespace

TEST_CASE("graded enumeration matches the declared ordering") {
    GradedBasis gb(2, 2);
    const std::vector<MultiIndex> want = {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
    CHECK(gb.indices() == want);
    CHECK(gb.size() == 6);

    GradedBasis g1(1, 3);
    const std::vector<MultiIndex> want1 = {{0}, {1}, {2}, {3}};
    CHECK(g1.indices() == want1);

    CHECK(GradedBasis(3, 2).size() == 10);
    CHECK(binomial_size(3, 2) == 10);
}

TEST_CASE("position is the inverse of enumeration") {
    for (int d = 1; d <= 4; ++d) {
        for (int L = 0; L <= 6; ++L) {
            GradedBasis gb(d, L);
            CHECK(gb.size() == binomial_size(d, L));
            for (std::size_t p = 0; p < gb.size(); ++p) CHECK(gb.position(gb.at(p)) == p);
        }
    }
    GradedBasis gb(2, 2);
    CHECK(gb.position({1, 1}) == 4);
    CHECK(gb.position({0, 0}) == 0);
    CHECK(gb.position({2, 0}) == 5);
    CHECK_THROWS_AS(gb.position({2, 1}), std::out_of_range);
}

TEST_CASE("grade prefix counts") {
    GradedBasis gb(2, 3);
    CHECK(gb.count_up_to(0) == 1);
    CHECK(gb.count_up_to(1) == 3);
    CHECK(gb.count_up_to(2) == 6);
    CHECK(gb.count_up_to(3) == 10);
    CHECK(gb.count_up_to(9) == 10);
    CHECK(gb.count_up_to(-1) == 0);
}

TEST_CASE("multinomial worked examples") {
    CHECK(multinomial({2}, {{1}, {1}}) == 2);
    CHECK(multinomial({2, 1}, {{1, 0}, {1, 1}}) == 2);
    CHECK(multinomial({3}, {{3}}) == 1);
    CHECK_THROWS_AS(multinomial({2}, {{1}}), std::invalid_argument);
}

TEST_CASE("multinomial matches brute-force factorials") {
    // all 1D splits into two parts, |gamma| <= 8
    for (int n = 0; n <= 8; ++n)
        for (int k = 0; k <= n; ++k) {
            const std::uint64_t want = factorial(n) / (factorial(k) * factorial(n - k));
            CHECK(multinomial({n}, {{k}, {n - k}}) == want);
        }
    // 3D splits into three parts with componentwise enumeration, |gamma| <= 8 total
    const MultiIndex gamma = {3, 2, 3};
    for (int a1 = 0; a1 <= 3; ++a1)
        for (int a2 = 0; a2 <= 2; ++a2)
            for (int a3 = 0; a3 <= 3; ++a3)
                for (int b1 = 0; b1 + a1 <= 3; ++b1)
                    for (int b2 = 0; b2 + a2 <= 2; ++b2)
                        for (int b3 = 0; b3 + a3 <= 3; ++b3) {
                            const MultiIndex p1 = {a1, a2, a3};
                            const MultiIndex p2 = {b1, b2, b3};
                            const MultiIndex p3 = {3 - a1 - b1, 2 - a2 - b2, 3 - a3 - b3};
                            std::uint64_t want = 1;
                            for (int i = 0; i < 3; ++i)
                                want *= factorial(gamma[i]) /
                                        (factorial(p1[i]) * factorial(p2[i]) * factorial(p3[i]));
                            CHECK(multinomial(gamma, {p1, p2, p3}) == want);
                        }
}

TEST_CASE("text form round trip") {
    const MultiIndex a = {1, 0, 4};
    CHECK(mi_text(a) == "1_0_4");
    CHECK(mi_parse("1_0_4") == a);
}

TEST_CASE("componentwise arithmetic") {
    CHECK(mi_add({1, 2}, {0, 3}) == MultiIndex{1, 5});
    CHECK(mi_sub({1, 2}, {1, 0}) == MultiIndex{0, 2});
    CHECK_THROWS_AS(mi_sub({1, 0}, {0, 1}), std::invalid_argument);
    CHECK(mi_leq({1, 0}, {1, 2}));
    CHECK_FALSE(mi_leq({2, 0}, {1, 2}));
}
