#pragma once

#include <cstdint>

#include "rpcsde/models.hpp"
#include "rpcsde/orthopoly.hpp"

namespace rpcsde {

struct McConfig {
    std::uint64_t paths = 10000;
    std::uint64_t seed = 1;
    bool antithetic = false;
    double h_ref = 0.001;
    long record_every = 1;   // record stride in steps of h_ref
    int moment_order = 4;    // max |gamma| of recorded mixed moments
    int threads = 0;         // 0: RPCSDE_THREADS env or hardware count

    void validate() const;
};

// Per-time moment estimates with standard errors.  With antithetic pairing the
// sampling unit is a mirrored pair (its mean is one i.i.d. sample), otherwise a
// single path.
struct SampleStats {
    int dimension = 0;
    int moment_order = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> moments;  // [time][graded position]
    std::vector<std::vector<double>> ses;

    MomentTable table_at(std::size_t time_index) const;
};

// Euler-Maruyama path simulation v' = v + b(v) h + sigma(v) z sqrt(h) with
// per-path counter-split substreams; bit-identical output for a fixed seed
// regardless of thread count.  Diverged (non-finite) paths abort the run.
SampleStats mc_simulate(const ModelSpec& model, const McConfig& cfg, double T);

struct Cumulants {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;
};

// First four cumulants of one coordinate from raw moments; throws numeric_error
// when the variance is not positive.
Cumulants cumulants_from_moments(const MomentTable& m, int coordinate);

// Delta-method standard errors for the cumulants (moment covariances ignored).
Cumulants cumulant_standard_errors(const MomentTable& m, const MomentTable& se, int coordinate);

}  // namespace rpcsde
