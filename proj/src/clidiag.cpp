#include "rpcsde/clidiag.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rpcsde/prpc.hpp"

namespace rpcsde {

namespace fs = std::filesystem;
using nlohmann::json;

double moment_metric(const MomentTable& m1, const MomentTable& m2, int order) {
    if (m1.dimension() != m2.dimension())
        throw config_error("moment metric dimension mismatch");
    if (m1.max_order() < order || m2.max_order() < order)
        throw config_error("moment metric order exceeds table order");
    GradedBasis gb(m1.dimension(), order);
    double s = 0.0;
    double fact = 1.0;
    int cur = 0;
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const int o = gb.order_of(p);
        while (cur < o) fact *= ++cur;
        s += std::abs(m1.get(gb.at(p)) - m2.get(gb.at(p))) / fact;
    }
    return s;
}

double w1_moment_bound(const MomentTable& m1, const MomentTable& m2, double box_half_width,
                       int q, int dimension) {
    if (q < 2) throw config_error("w1 bound needs q >= 2");
    const double R = box_half_width;
    GradedBasis gb(dimension, q);
    double sq = 0.0;
    for (std::size_t p = 0; p < gb.size(); ++p) {
        const double diff = m1.get(gb.at(p)) - m2.get(gb.at(p));
        const double scaled = diff / std::pow(R, gb.order_of(p));
        sq += scaled * scaled;
    }
    const double cd = std::sqrt(static_cast<double>(dimension)) *
                      std::pow(1.0 + std::sqrt(2.0), dimension / 2.0);
    return 36.0 * dimension * dimension * R / q + cd * std::pow(3.0, q) * R * std::sqrt(sq);
}

std::pair<double, double> macro_observables(const MomentTable& m) {
    if (m.max_order() < 2) throw config_error("macro observables need moments to order 2");
    const int d = m.dimension();
    double energy = 0.0, variance = 0.0;
    MultiIndex g(d, 0);
    for (int k = 0; k < d; ++k) {
        g.assign(d, 0);
        g[k] = 1;
        const double mean = m.get(g);
        g[k] = 2;
        const double m2 = m.get(g);
        energy += 0.5 * mean * mean;
        variance += m2 - mean * mean;
    }
    return {energy, variance};
}

namespace {

MvPoly poly_from_json(const json& j, int dim) {
    MvPoly p(dim);
    for (const auto& term : j) {
        const auto exps = term.at("exponents").get<std::vector<int>>();
        if (static_cast<int>(exps.size()) != dim)
            throw config_error("polynomial term exponent count does not match dimension");
        p.add_term(exps, term.at("coeff").get<double>());
    }
    return p;
}

DistComponent component_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "gaussian")
        return DistComponent::gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
    if (type == "uniform")
        return DistComponent::uniform(j.at("lower").get<double>(), j.at("upper").get<double>());
    if (type == "constant") return DistComponent::constant(j.at("value").get<double>());
    throw config_error("unknown initial component type '" + type + "'");
}

ModelSpec model_from_json(const json& j) {
    ModelSpec model;
    if (j.contains("name") && j.at("name").get<std::string>() != "custom") {
        std::map<std::string, double> overrides;
        if (j.contains("overrides"))
            for (const auto& [k, v] : j.at("overrides").items()) overrides[k] = v.get<double>();
        model = build_example(j.at("name").get<std::string>(), overrides);
    } else {
        model.name = j.value("label", std::string("custom"));
        model.dim = j.at("dimension").get<int>();
        model.noise_dim = j.at("noise_dimension").get<int>();
        for (const auto& bj : j.at("drift")) model.drift.push_back(poly_from_json(bj, model.dim));
        for (const auto& row : j.at("diffusion")) {
            std::vector<MvPoly> r;
            for (const auto& sj : row) r.push_back(poly_from_json(sj, model.dim));
            model.diffusion.push_back(std::move(r));
        }
        for (const auto& cj : j.at("initial"))
            model.initial.components.push_back(component_from_json(cj));
        if (j.contains("default_h")) model.default_h = j.at("default_h").get<double>();
        if (j.contains("default_T")) model.default_T = j.at("default_T").get<double>();
        model.validate();
    }
    if (j.contains("augment_parameter"))
        model = augment_parameter(model, component_from_json(j.at("augment_parameter")));
    if (j.contains("augment_copy")) {
        const auto& cj = j.at("augment_copy");
        model = augment_initial_copy(model, cj.at("source").get<int>(),
                                     cj.value("jitter_sd", 0.3));
    }
    return model;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ModelSpec model_from_json_text(const std::string& json_text) {
    return model_from_json(json::parse(json_text));
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    try {
        RunConfig cfg;
        cfg.method = j.at("method").get<std::string>();
        if (cfg.method != "mrpc" && cfg.method != "prpc" && cfg.method != "mc")
            throw config_error("method must be one of mrpc, prpc, mc");
        cfg.model = model_from_json(j.at("model"));
        cfg.output_dir = j.value("output", std::string("out"));

        if (j.contains("observables")) {
            cfg.want_moments = cfg.want_diagnostics = cfg.want_cumulants = false;
            for (const auto& o : j.at("observables")) {
                const std::string name = o.get<std::string>();
                if (name == "moments") cfg.want_moments = true;
                else if (name == "diagnostics") cfg.want_diagnostics = true;
                else if (name == "cumulants") cfg.want_cumulants = true;
                else throw config_error("unknown observable '" + name + "'");
            }
        }

        const json empty = json::object();
        const json& sj = j.contains(cfg.method) ? j.at(cfg.method) : empty;
        cfg.T = sj.value("T", cfg.model.default_T);
        if (cfg.method == "mc") {
            cfg.mc.paths = sj.value("paths", 10000ULL);
            cfg.mc.seed = sj.value("seed", 1ULL);
            cfg.mc.antithetic = sj.value("antithetic", false);
            cfg.mc.h_ref = sj.value("h_ref", cfg.model.default_h);
            cfg.mc.record_every = sj.value("record_every", 1L);
            cfg.mc.moment_order = sj.value("moment_order", 4);
            cfg.mc.threads = sj.value("threads", 0);
            cfg.mc.validate();
        } else {
            cfg.stepper.L = sj.value("L", 2);
            cfg.stepper.S = sj.value("S", 2);
            cfg.stepper.h = sj.value("h", cfg.model.default_h);
            cfg.stepper.T = cfg.T;
            cfg.stepper.record_every = sj.value("record_every", 1);
            cfg.stepper.pivot_floor = sj.value("pivot_floor", 1e-10);
            cfg.stepper.guard_orders = sj.value("guard_orders", 0);
            const std::string mode = sj.value("mode", std::string("sparse"));
            if (mode == "sparse") cfg.stepper.mode = TensorMode::Sparse;
            else if (mode == "full") cfg.stepper.mode = TensorMode::Full;
            else throw config_error("mode must be sparse or full");
            cfg.stepper.validate();
        }
        return cfg;
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw config_error("missing CSV column " + name);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open CSV file " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw config_error("empty CSV file " + path);
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) table.columns.push_back(tok);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.columns.size());
        std::stringstream ls(line);
        while (std::getline(ls, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
        if (row.size() != table.columns.size())
            throw config_error("ragged CSV row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write CSV file " + path);
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out << ',';
        out << columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << fmt17(row[i]);
        }
        out << '\n';
    }
}

void write_basis_csv(const OrthonormalBasis& basis, const std::string& path) {
    const GradedBasis& gb = basis.graded();
    std::vector<std::string> cols{"row"};
    for (std::size_t p = 0; p < gb.size(); ++p) cols.push_back("x_" + mi_text(gb.at(p)));
    std::vector<std::vector<double>> rows;
    for (std::size_t a = 0; a < basis.size(); ++a) {
        std::vector<double> row{static_cast<double>(a)};
        for (std::size_t b = 0; b < basis.size(); ++b) row.push_back(basis.b(a, b));
        rows.push_back(std::move(row));
    }
    write_csv(path, cols, rows);
}

namespace {

std::vector<std::string> moment_columns(int dimension, int order, bool with_se) {
    GradedBasis gb(dimension, order);
    std::vector<std::string> cols{"t"};
    for (std::size_t p = 0; p < gb.size(); ++p) cols.push_back("m_" + mi_text(gb.at(p)));
    if (with_se)
        for (std::size_t p = 0; p < gb.size(); ++p) cols.push_back("m_" + mi_text(gb.at(p)) + "_se");
    return cols;
}

std::vector<std::string> cumulant_columns(int dimension, bool with_se) {
    std::vector<std::string> cols{"t"};
    const char* names[] = {"mean", "variance", "skewness", "excess_kurtosis", "k3", "k4"};
    for (int i = 0; i < dimension; ++i)
        for (const char* n : names) cols.push_back("x" + std::to_string(i) + "_" + n);
    if (with_se)
        for (int i = 0; i < dimension; ++i)
            for (const char* n : names) cols.push_back("x" + std::to_string(i) + "_" + std::string(n) + "_se");
    return cols;
}

void append_cumulants(std::vector<double>& row, const MomentTable& m) {
    for (int i = 0; i < m.dimension(); ++i) {
        Cumulants c;
        try {
            c = cumulants_from_moments(m, i);
        } catch (const numeric_error&) {
            // degenerate variance (e.g. a frozen constant component)
            MultiIndex g(m.dimension(), 0);
            g[i] = 1;
            const double m1 = m.get(g);
            g[i] = 2;
            c.mean = m1;
            c.variance = m.get(g) - m1 * m1;
            c.skewness = c.excess_kurtosis = c.k3 = c.k4 = std::nan("");
        }
        row.push_back(c.mean);
        row.push_back(c.variance);
        row.push_back(c.skewness);
        row.push_back(c.excess_kurtosis);
        row.push_back(c.k3);
        row.push_back(c.k4);
    }
}

}  // namespace

void write_run_outputs(const RunConfig& cfg, const RunResult& result) {
    fs::create_directories(cfg.output_dir);
    if (cfg.want_moments) {
        std::vector<std::vector<double>> rows;
        rows.reserve(result.records.size());
        for (const auto& rec : result.records) {
            std::vector<double> row{rec.t};
            row.insert(row.end(), rec.moments.begin(), rec.moments.end());
            rows.push_back(std::move(row));
        }
        write_csv(cfg.output_dir + "/moments.csv",
                  moment_columns(result.dimension, result.moment_order, false), rows);
    }
    if (cfg.want_diagnostics) {
        std::vector<std::vector<double>> rows;
        for (const auto& rec : result.records)
            rows.push_back({rec.t, rec.lambda_min, rec.lambda_max, rec.ortho_residual});
        write_csv(cfg.output_dir + "/diagnostics.csv",
                  {"t", "lambda_min", "lambda_max", "ortho_residual"}, rows);
    }
    if (cfg.want_cumulants && result.moment_order >= 4) {
        std::vector<std::vector<double>> rows;
        for (const auto& rec : result.records) {
            MomentTable m(result.dimension, result.moment_order);
            m.values() = rec.moments;
            std::vector<double> row{rec.t};
            append_cumulants(row, m);
            rows.push_back(std::move(row));
        }
        write_csv(cfg.output_dir + "/cumulants.csv", cumulant_columns(result.dimension, false),
                  rows);
    }
}

void write_mc_outputs(const RunConfig& cfg, const SampleStats& stats) {
    fs::create_directories(cfg.output_dir);
    if (cfg.want_moments) {
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < stats.times.size(); ++r) {
            std::vector<double> row{stats.times[r]};
            row.insert(row.end(), stats.moments[r].begin(), stats.moments[r].end());
            row.insert(row.end(), stats.ses[r].begin(), stats.ses[r].end());
            rows.push_back(std::move(row));
        }
        write_csv(cfg.output_dir + "/moments.csv",
                  moment_columns(stats.dimension, stats.moment_order, true), rows);
    }
    if (cfg.want_cumulants && stats.moment_order >= 4) {
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < stats.times.size(); ++r) {
            MomentTable m(stats.dimension, stats.moment_order);
            m.values() = stats.moments[r];
            MomentTable se(stats.dimension, stats.moment_order);
            se.values() = stats.ses[r];
            std::vector<double> row{stats.times[r]};
            append_cumulants(row, m);
            for (int i = 0; i < stats.dimension; ++i) {
                const Cumulants cs = cumulant_standard_errors(m, se, i);
                row.push_back(cs.mean);
                row.push_back(cs.variance);
                // skewness/kurtosis ratios have no delta-method SE here
                row.push_back(std::nan(""));
                row.push_back(std::nan(""));
                row.push_back(cs.k3);
                row.push_back(cs.k4);
            }
            rows.push_back(std::move(row));
        }
        write_csv(cfg.output_dir + "/cumulants.csv", cumulant_columns(stats.dimension, true), rows);
    }
}

int run_experiment(const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = parse_run_config(config_path);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        if (cfg.method == "mc") {
            const SampleStats stats = mc_simulate(cfg.model, cfg.mc, cfg.T);
            write_mc_outputs(cfg, stats);
            return 0;
        }
        const RunResult result =
            cfg.method == "mrpc" ? mrpc_run(cfg.model, cfg.stepper) : prpc_run(cfg.model, cfg.stepper);
        write_run_outputs(cfg, result);
        if (result.status != 0) {
            std::cerr << "numerical failure at step " << result.failure_step << ": "
                      << result.error << "\n";
            return 3;
        }
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

std::pair<std::vector<double>, std::vector<double>> compare_moment_files(const std::string& a,
                                                                         const std::string& b,
                                                                         int order) {
    const CsvTable ta = read_csv(a);
    const CsvTable tb = read_csv(b);
    // shared moment columns within the requested order
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    std::vector<int> orders;
    for (std::size_t i = 0; i < ta.columns.size(); ++i) {
        const std::string& name = ta.columns[i];
        if (name.rfind("m_", 0) != 0 || (name.size() > 3 && name.rfind("_se") == name.size() - 3))
            continue;
        const MultiIndex g = mi_parse(name.substr(2));
        if (total_order(g) > order) continue;
        for (std::size_t j = 0; j < tb.columns.size(); ++j)
            if (tb.columns[j] == name) {
                shared.emplace_back(i, j);
                orders.push_back(total_order(g));
            }
    }
    if (shared.empty()) throw config_error("no shared moment columns up to the requested order");
    const std::size_t ti = ta.column_index("t");
    const std::size_t tj = tb.column_index("t");
    const std::size_t n = std::min(ta.rows.size(), tb.rows.size());
    std::vector<double> times, metrics;
    for (std::size_t r = 0; r < n; ++r) {
        if (std::abs(ta.rows[r][ti] - tb.rows[r][tj]) > 1e-9)
            throw config_error("time grids do not match at row " + std::to_string(r));
        double s = 0.0;
        for (std::size_t k = 0; k < shared.size(); ++k) {
            double fact = 1.0;
            for (int f = 2; f <= orders[k]; ++f) fact *= f;
            s += std::abs(ta.rows[r][shared[k].first] - tb.rows[r][shared[k].second]) / fact;
        }
        times.push_back(ta.rows[r][ti]);
        metrics.push_back(s);
    }
    return {times, metrics};
}

}  // namespace rpcsde
