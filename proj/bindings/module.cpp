#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rpcsde/clidiag.hpp"
#include "rpcsde/prpc.hpp"

namespace py = pybind11;
using namespace rpcsde;

namespace {

MrpcConfig stepper_config(int L, int S, double h, double T, const std::string& mode,
                          int record_every) {
    MrpcConfig cfg;
    cfg.L = L;
    cfg.S = S;
    cfg.h = h;
    cfg.T = T;
    cfg.record_every = record_every;
    if (mode == "sparse") cfg.mode = TensorMode::Sparse;
    else if (mode == "full") cfg.mode = TensorMode::Full;
    else throw config_error("mode must be sparse or full");
    return cfg;
}

py::dict result_to_dict(const RunResult& r) {
    GradedBasis gb(r.dimension, r.moment_order);
    py::list columns;
    for (std::size_t p = 0; p < gb.size(); ++p) columns.append("m_" + mi_text(gb.at(p)));
    py::list times, moments, lmin, lmax, resid;
    for (const auto& rec : r.records) {
        times.append(rec.t);
        moments.append(rec.moments);
        lmin.append(rec.lambda_min);
        lmax.append(rec.lambda_max);
        resid.append(rec.ortho_residual);
    }
    py::dict d;
    d["columns"] = columns;
    d["t"] = times;
    d["moments"] = moments;
    d["lambda_min"] = lmin;
    d["lambda_max"] = lmax;
    d["ortho_residual"] = resid;
    d["status"] = r.status;
    d["error"] = r.error;
    return d;
}

py::dict stats_to_dict(const SampleStats& s) {
    GradedBasis gb(s.dimension, s.moment_order);
    py::list columns;
    for (std::size_t p = 0; p < gb.size(); ++p) columns.append("m_" + mi_text(gb.at(p)));
    py::dict d;
    d["columns"] = columns;
    d["t"] = s.times;
    d["moments"] = s.moments;
    d["se"] = s.ses;
    return d;
}

}  // namespace

PYBIND11_MODULE(_rpcsde, m) {
    m.doc() = "recursive polynomial chaos solvers for SDEs";

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("name", &ModelSpec::name)
        .def_readonly("dim", &ModelSpec::dim)
        .def_readonly("noise_dim", &ModelSpec::noise_dim)
        .def_readonly("default_h", &ModelSpec::default_h)
        .def_readonly("default_T", &ModelSpec::default_T);

    m.def("example_names", [] {
        return std::vector<std::string>{"ex41",       "ex41_random_coeff", "ex42",
                                        "ex43_case1", "ex43_case2",        "lorenz96"};
    });
    m.def("build_example", &build_example, py::arg("name"),
          py::arg("overrides") = std::map<std::string, double>{});
    m.def("model_from_json", &model_from_json_text, py::arg("json_text"));
    m.def(
        "augment_initial_copy",
        [](const ModelSpec& model, int source, double jitter) {
            return augment_initial_copy(model, source, jitter);
        },
        py::arg("model"), py::arg("source"), py::arg("jitter_sd") = 0.3);

    m.def(
        "run_mrpc",
        [](const ModelSpec& model, int L, int S, double h, double T, const std::string& mode,
           int record_every) {
            return result_to_dict(mrpc_run(model, stepper_config(L, S, h, T, mode, record_every)));
        },
        py::arg("model"), py::arg("L"), py::arg("S"), py::arg("h"), py::arg("T"),
        py::arg("mode") = "sparse", py::arg("record_every") = 1);

    m.def(
        "run_prpc",
        [](const ModelSpec& model, int L, int S, double h, double T, int record_every) {
            return result_to_dict(
                prpc_run(model, stepper_config(L, S, h, T, "sparse", record_every)));
        },
        py::arg("model"), py::arg("L"), py::arg("S"), py::arg("h"), py::arg("T"),
        py::arg("record_every") = 1);

    m.def(
        "run_mc",
        [](const ModelSpec& model, double T, std::uint64_t paths, std::uint64_t seed,
           bool antithetic, double h_ref, long record_every, int moment_order, int threads) {
            McConfig cfg;
            cfg.paths = paths;
            cfg.seed = seed;
            cfg.antithetic = antithetic;
            cfg.h_ref = h_ref;
            cfg.record_every = record_every;
            cfg.moment_order = moment_order;
            cfg.threads = threads;
            return stats_to_dict(mc_simulate(model, cfg, T));
        },
        py::arg("model"), py::arg("T"), py::arg("paths") = 10000, py::arg("seed") = 1,
        py::arg("antithetic") = false, py::arg("h_ref") = 0.001, py::arg("record_every") = 1,
        py::arg("moment_order") = 4, py::arg("threads") = 0);

    m.def(
        "moment_metric",
        [](const std::vector<double>& a, const std::vector<double>& b, int dimension, int order) {
            MomentTable ta(dimension, order), tb(dimension, order);
            if (a.size() != ta.values().size() || b.size() != tb.values().size())
                throw config_error("moment vector length does not match binom(d+J, J)");
            ta.values() = a;
            tb.values() = b;
            return moment_metric(ta, tb, order);
        },
        py::arg("m1"), py::arg("m2"), py::arg("dimension"), py::arg("order"));

    m.def(
        "w1_moment_bound",
        [](const std::vector<double>& a, const std::vector<double>& b, int dimension, int order,
           double box_half_width, int q) {
            MomentTable ta(dimension, order), tb(dimension, order);
            ta.values() = a;
            tb.values() = b;
            return w1_moment_bound(ta, tb, box_half_width, q, dimension);
        },
        py::arg("m1"), py::arg("m2"), py::arg("dimension"), py::arg("order"),
        py::arg("box_half_width"), py::arg("q"));

    m.def("run_experiment", &run_experiment, py::arg("config_path"));
    m.def("selftest", [] { return selftest(false); });

    py::register_exception<config_error>(m, "ConfigError");
    py::register_exception<numeric_error>(m, "NumericError");
}
