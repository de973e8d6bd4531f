#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rpcsde/clidiag.hpp"

using namespace rpcsde;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
        : path(fs::temp_directory_path() /
               ("rpcsde_test_" +
                std::to_string(
                    std::chrono::steady_clock::now().time_since_epoch().count()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("moment metric worked examples") {
    MomentTable a(1, 3), b(1, 3);
    a.set({2}, 1.0);
    b = a;
    CHECK(moment_metric(a, b, 3) == doctest::Approx(0.0).scale(1.0));
    b.set({2}, 1.1);
    CHECK(moment_metric(a, b, 2) == doctest::Approx(0.05));
    b.set({2}, 1.0);
    b.set({3}, 0.6);
    CHECK(moment_metric(a, b, 3) == doctest::Approx(0.1));
    CHECK_THROWS_AS(moment_metric(a, b, 5), config_error);
}

TEST_CASE("w1 bound worked examples") {
    MomentTable a(1, 20), b(1, 20);
    for (int n = 0; n <= 20; ++n) {
        const double v = DistComponent::gaussian(0.1, 0.2).raw_moment(n);
        a.set({n}, v);
        b.set({n}, v);
    }
    CHECK(w1_moment_bound(a, b, 1.0, 10, 1) == doctest::Approx(3.6));
    CHECK(w1_moment_bound(a, b, 1.0, 20, 1) == doctest::Approx(1.8));
    MomentTable c = a;
    c.set({1}, a.get({1}) + 0.01);
    const double want = 18.0 + std::sqrt(1.0 + std::sqrt(2.0)) * 9.0 * 0.01;
    CHECK(w1_moment_bound(a, c, 1.0, 2, 1) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("macro observables worked examples") {
    InitialDistribution d;
    d.components.assign(6, DistComponent::gaussian(0.0, 1.0));
    auto [e, v] = macro_observables(initial_moments(d, 2));
    CHECK(e == doctest::Approx(0.0).scale(1.0));
    CHECK(v == doctest::Approx(6.0));

    d.components.assign(6, DistComponent::constant(1.0));
    std::tie(e, v) = macro_observables(initial_moments(d, 2));
    CHECK(e == doctest::Approx(3.0));
    CHECK(v == doctest::Approx(0.0).scale(1.0));

    d.components.assign(6, DistComponent::gaussian(0.0, 1.0));
    d.components[0] = DistComponent::gaussian(1.0, 1.0);
    std::tie(e, v) = macro_observables(initial_moments(d, 2));
    CHECK(e == doctest::Approx(0.5));
    CHECK(v == doctest::Approx(6.0));
}

TEST_CASE("csv round trip is bit exact") {
    TempDir tmp;
    std::vector<std::vector<double>> rows = {
        {0.0, 1.0 / 3.0, -2.718281828459045e-5},
        {0.012, 7.123456789012345e17, 1e-300},
    };
    write_csv(tmp.file("x.csv"), {"t", "a", "b"}, rows);
    const CsvTable t = read_csv(tmp.file("x.csv"));
    REQUIRE(t.columns == std::vector<std::string>{"t", "a", "b"});
    REQUIRE(t.rows.size() == rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) CHECK(t.rows[r][c] == rows[r][c]);
}

TEST_CASE("run_experiment: mrpc outputs and exit codes") {
    TempDir tmp;
    SUBCASE("successful ex41 run writes the expected row count") {
        write_text(tmp.file("run.json"), R"({
            "method": "mrpc",
            "model": {"name": "ex41"},
            "mrpc": {"L": 2, "S": 2, "h": 0.012, "T": 0.12},
            "output": ")" + tmp.file("out") + R"("
        })");
        CHECK(run_experiment(tmp.file("run.json")) == 0);
        const CsvTable m = read_csv(tmp.file("out") + "/moments.csv");
        CHECK(m.rows.size() == 11);
        CHECK(m.columns[0] == "t");
        CHECK(m.columns[1] == "m_0_0");
        const CsvTable d = read_csv(tmp.file("out") + "/diagnostics.csv");
        CHECK(d.rows.size() == 11);
        CHECK(d.columns == std::vector<std::string>{"t", "lambda_min", "lambda_max",
                                                    "ortho_residual"});
    }
    SUBCASE("malformed config returns 2 and writes nothing") {
        write_text(tmp.file("bad.json"), "{ not json");
        CHECK(run_experiment(tmp.file("bad.json")) == 2);
        CHECK(!fs::exists(tmp.file("out")));
        CHECK(run_experiment(tmp.file("missing.json")) == 2);
    }
    SUBCASE("unknown method returns 2") {
        write_text(tmp.file("bad2.json"), R"({"method": "nope", "model": {"name": "ex41"}})");
        CHECK(run_experiment(tmp.file("bad2.json")) == 2);
    }
    SUBCASE("over-conditioned run returns 3 with partial diagnostics") {
        write_text(tmp.file("hard.json"), R"({
            "method": "mrpc",
            "model": {"name": "ex41"},
            "mrpc": {"L": 8, "S": 2, "h": 0.012, "T": 3.0},
            "output": ")" + tmp.file("out3") + R"("
        })");
        CHECK(run_experiment(tmp.file("hard.json")) == 3);
        CHECK(fs::exists(tmp.file("out3") + "/diagnostics.csv"));
    }
}

TEST_CASE("run_experiment: inline model, mc method, cumulants") {
    TempDir tmp;
    write_text(tmp.file("mc.json"), R"({
        "method": "mc",
        "model": {
            "name": "custom",
            "label": "ou",
            "dimension": 1,
            "noise_dimension": 1,
            "drift": [[{"exponents": [1], "coeff": -1.0}]],
            "diffusion": [[[{"exponents": [0], "coeff": 1.0}]]],
            "initial": [{"type": "gaussian", "mean": 0.0, "variance": 1.0}]
        },
        "mc": {"paths": 2000, "seed": 4, "antithetic": true, "h_ref": 0.01,
               "record_every": 5, "moment_order": 4, "T": 0.5},
        "observables": ["moments", "cumulants"],
        "output": ")" + tmp.file("mcout") + R"("
    })");
    CHECK(run_experiment(tmp.file("mc.json")) == 0);
    const CsvTable m = read_csv(tmp.file("mcout") + "/moments.csv");
    CHECK(m.rows.size() == 11);
    CHECK(m.column_index("m_2_se") > 0);
    const CsvTable c = read_csv(tmp.file("mcout") + "/cumulants.csv");
    CHECK(c.column_index("x0_variance") > 0);
}

TEST_CASE("compare equals the metric applied to the parsed files") {
    TempDir tmp;
    write_text(tmp.file("a.json"), R"({
        "method": "mrpc",
        "model": {"name": "ex41"},
        "mrpc": {"L": 2, "S": 2, "h": 0.012, "T": 0.12},
        "output": ")" + tmp.file("a") + R"("
    })");
    write_text(tmp.file("b.json"), R"({
        "method": "prpc",
        "model": {"name": "ex41"},
        "prpc": {"L": 2, "S": 2, "h": 0.012, "T": 0.12},
        "output": ")" + tmp.file("b") + R"("
    })");
    REQUIRE(run_experiment(tmp.file("a.json")) == 0);
    REQUIRE(run_experiment(tmp.file("b.json")) == 0);
    const auto [times, metrics] =
        compare_moment_files(tmp.file("a") + "/moments.csv", tmp.file("b") + "/moments.csv", 2);
    REQUIRE(times.size() == 11);

    const CsvTable ta = read_csv(tmp.file("a") + "/moments.csv");
    const CsvTable tb = read_csv(tmp.file("b") + "/moments.csv");
    const GradedBasis gb(2, 2);
    for (std::size_t r = 0; r < times.size(); ++r) {
        MomentTable ma(2, 2), mb(2, 2);
        for (std::size_t p = 0; p < gb.size(); ++p) {
            const std::string col = "m_" + mi_text(gb.at(p));
            ma.at(p) = ta.rows[r][ta.column_index(col)];
            mb.at(p) = tb.rows[r][tb.column_index(col)];
        }
        CHECK(metrics[r] == doctest::Approx(moment_metric(ma, mb, 2)).epsilon(1e-12));
    }
}

TEST_CASE("basis debug dump round trips") {
    TempDir tmp;
    InitialDistribution d;
    d.components = {DistComponent::gaussian(0.0, 1.0)};
    const auto basis = basis_from_moments(initial_moments(d, 4), 2);
    write_basis_csv(basis, tmp.file("basis.csv"));
    const CsvTable t = read_csv(tmp.file("basis.csv"));
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[2][t.column_index("x_0")] == basis.b(2, 0));
    CHECK(t.rows[2][t.column_index("x_2")] == basis.b(2, 2));
}

TEST_CASE("selftest passes") { CHECK(selftest(false) == 0); }
