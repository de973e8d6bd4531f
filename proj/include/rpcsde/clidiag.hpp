#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rpcsde/mcref.hpp"
#include "rpcsde/models.hpp"
#include "rpcsde/mrpc.hpp"
#include "rpcsde/run_record.hpp"

namespace rpcsde {

// Truncated moment distance: sum_{|gamma| <= order} |m1 - m2| / |gamma|!.
double moment_metric(const MomentTable& m1, const MomentTable& m2, int order);

// Wasserstein-1 bound from matched moments of laws supported in [-R, R]^d:
//   36 d^2 R / q + sqrt(d) (1+sqrt(2))^{d/2} 3^q R
//       * sqrt(sum_{|gamma|<=q} ((m1-m2)/R^{|gamma|})^2).
double w1_moment_bound(const MomentTable& m1, const MomentTable& m2, double box_half_width,
                       int q, int dimension);

// (mean energy, total variance) = (1/2 sum_k E[X_k]^2, sum_k Var(X_k)).
std::pair<double, double> macro_observables(const MomentTable& m);

struct RunConfig {
    std::string method;  // mrpc | prpc | mc
    ModelSpec model;
    MrpcConfig stepper;
    McConfig mc;
    double T = 0.0;
    std::string output_dir;
    bool want_moments = true;
    bool want_diagnostics = true;
    bool want_cumulants = false;
};

RunConfig parse_run_config(const std::string& path);
ModelSpec model_from_json_text(const std::string& json_text);

// Column-oriented view of a parsed CSV.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

// Debug dump: one row per basis polynomial, monomial coefficients as columns.
void write_basis_csv(const OrthonormalBasis& basis, const std::string& path);

// moments.csv / diagnostics.csv / cumulants.csv writers (17 significant digits).
void write_run_outputs(const RunConfig& cfg, const RunResult& result);
void write_mc_outputs(const RunConfig& cfg, const SampleStats& stats);

// Executes the configured method.  Exit codes: 0 success, 2 config error,
// 3 numerical failure (partial outputs retained).
int run_experiment(const std::string& config_path);

// Per-time moment metric between two moments.csv files truncated at `order`;
// returns (times, metric values).
std::pair<std::vector<double>, std::vector<double>> compare_moment_files(const std::string& a,
                                                                         const std::string& b,
                                                                         int order);

// Fast built-in property checks; returns the number of failures and prints
// one line per check.
int selftest(bool verbose = true);

}  // namespace rpcsde
