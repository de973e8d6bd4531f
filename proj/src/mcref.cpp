#include "rpcsde/mcref.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace rpcsde {

void McConfig::validate() const {
    if (paths < 2) throw config_error("mc paths must be >= 2");
    if (antithetic && paths % 2 != 0) throw config_error("antithetic sampling needs an even path count");
    if (!(h_ref > 0)) throw config_error("h_ref must be > 0");
    if (record_every < 1) throw config_error("record_every must be >= 1");
    if (moment_order < 1) throw config_error("moment_order must be >= 1");
}

MomentTable SampleStats::table_at(std::size_t time_index) const {
    MomentTable t(dimension, moment_order);
    t.values() = moments.at(time_index);
    return t;
}

namespace {

// splitmix64 substream per sampling unit.  The initial state is scattered by
// the finalizer so distinct units land far apart on the +golden-ratio orbit;
// plain offsets of the form seed ^ (path * golden) would make adjacent paths
// walk almost the same sequence.
struct Rng {
    std::uint64_t state;
    bool have_cached = false;
    double cached = 0.0;

    static std::uint64_t fmix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    explicit Rng(std::uint64_t seed, std::uint64_t path) {
        state = fmix(seed + 0x9E3779B97F4A7C15ULL) ^
                fmix(path * 0xBF58476D1CE4E5B9ULL + 0xD1B54A32D192ED03ULL);
    }
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform01() {  // (0, 1)
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
    double gaussian() {  // Box-Muller, fixed two-uniform consumption per pair
        if (have_cached) {
            have_cached = false;
            return cached;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached = r * std::sin(a);
        have_cached = true;
        return r * std::cos(a);
    }
};

// Compiled polynomial: flat term list for fast evaluation.
struct FastPoly {
    struct Term {
        std::vector<int> exps;
        double coeff;
    };
    std::vector<Term> terms;

    static FastPoly compile(const MvPoly& p) {
        FastPoly f;
        for (const auto& [a, c] : p.terms()) f.terms.push_back({a, c});
        return f;
    }
    double eval(const double* x) const {
        double s = 0.0;
        for (const auto& t : terms) {
            double m = t.coeff;
            for (std::size_t i = 0; i < t.exps.size(); ++i)
                for (int e = 0; e < t.exps[i]; ++e) m *= x[i];
            s += m;
        }
        return s;
    }
};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RPCSDE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

SampleStats mc_simulate(const ModelSpec& model, const McConfig& cfg, double T) {
    cfg.validate();
    model.validate();
    const double ratio = T / cfg.h_ref;
    const long nsteps = static_cast<long>(std::llround(ratio));
    if (nsteps < 1 || std::abs(ratio - static_cast<double>(nsteps)) > 1e-9 * std::max(1.0, ratio))
        throw config_error("T/h_ref must be an integer number of steps");

    const int d = model.dim;
    const int m = model.noise_dim;
    std::vector<FastPoly> drift(d);
    for (int i = 0; i < d; ++i) drift[i] = FastPoly::compile(model.drift[i]);
    std::vector<std::vector<FastPoly>> sigma(d, std::vector<FastPoly>(m));
    std::vector<std::vector<bool>> sigma_zero(d, std::vector<bool>(m, true));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < m; ++j) {
            sigma[i][j] = FastPoly::compile(model.diffusion[i][j]);
            sigma_zero[i][j] = model.diffusion[i][j].is_zero();
        }

    std::vector<long> record_steps;
    for (long k = 0; k <= nsteps; k += cfg.record_every) record_steps.push_back(k);
    if (record_steps.back() != nsteps) record_steps.push_back(nsteps);
    const std::size_t nrec = record_steps.size();

    const GradedBasis gb(d, cfg.moment_order);
    const std::size_t nmon = gb.size();

    // Copy-link bookkeeping for initial sampling.
    std::vector<int> copy_of(d, -1);
    std::vector<double> jitter(d, 0.0);
    for (const auto& link : model.copies) {
        copy_of[link.target] = link.source;
        jitter[link.target] = link.jitter_sd;
    }

    const bool anti = cfg.antithetic;
    const std::uint64_t units = anti ? cfg.paths / 2 : cfg.paths;  // sampling units
    const double sqh = std::sqrt(cfg.h_ref);

    // One sampling unit: a path, or an antithetic mirrored pair averaged.
    // Returns per-record-time monomial values into `vals` (nrec x nmon).
    auto run_unit = [&](std::uint64_t unit, std::vector<double>& vals) {
        Rng rng(cfg.seed, unit);
        const int nsub = anti ? 2 : 1;
        std::vector<double> x((anti ? 2 : 1) * d);
        // Initial draws, mirrored about the component mean for the partner.
        for (int i = 0; i < d; ++i) {
            if (copy_of[i] >= 0) continue;
            const auto& comp = model.initial.components[i];
            double delta = 0.0;
            switch (comp.kind) {
                case DistComponent::Kind::Gaussian:
                    delta = std::sqrt(comp.variance()) * rng.gaussian();
                    break;
                case DistComponent::Kind::Uniform:
                    delta = (comp.b - comp.a) * (rng.uniform01() - 0.5);
                    break;
                case DistComponent::Kind::Constant: delta = 0.0; break;
            }
            x[i] = comp.mean() + delta;
            if (anti) x[d + i] = comp.mean() - delta;
        }
        for (int i = 0; i < d; ++i) {
            if (copy_of[i] < 0) continue;
            const double jz = jitter[i] * rng.gaussian();
            x[i] = x[copy_of[i]] + jz;
            if (anti) x[d + i] = x[d + copy_of[i]] - jz;
        }

        std::fill(vals.begin(), vals.end(), 0.0);
        std::vector<double> z(m), bx(d), xnew(d), mono(nmon);
        std::size_t rec_cursor = 0;
        const double unit_weight = anti ? 0.5 : 1.0;

        auto record_state = [&](std::size_t rec) {
            for (int s = 0; s < nsub; ++s) {
                const double* xs = x.data() + s * d;
                // graded-recursive monomial evaluation: mono[p] for all |g|<=order
                for (std::size_t p = 0; p < nmon; ++p) {
                    const MultiIndex& g = gb.at(p);
                    double v = 1.0;
                    for (int i = 0; i < d; ++i)
                        for (int e = 0; e < g[i]; ++e) v *= xs[i];
                    mono[p] = v;
                }
                for (std::size_t p = 0; p < nmon; ++p)
                    vals[rec * nmon + p] += unit_weight * mono[p];
            }
        };

        if (record_steps[0] == 0) record_state(rec_cursor++);
        for (long k = 0; k < nsteps; ++k) {
            for (int j = 0; j < m; ++j) z[j] = rng.gaussian();
            for (int s = 0; s < nsub; ++s) {
                double* xs = x.data() + s * d;
                const double sign = (s == 0) ? 1.0 : -1.0;
                for (int i = 0; i < d; ++i) bx[i] = drift[i].eval(xs);
                for (int i = 0; i < d; ++i) {
                    double diff = 0.0;
                    for (int j = 0; j < m; ++j)
                        if (!sigma_zero[i][j]) diff += sigma[i][j].eval(xs) * (sign * z[j]);
                    xnew[i] = xs[i] + bx[i] * cfg.h_ref + diff * sqh;
                }
                for (int i = 0; i < d; ++i) {
                    if (!std::isfinite(xnew[i]))
                        throw diverged_path_error(anti ? 2 * unit + s : unit, (k + 1) * cfg.h_ref,
                                                  "path diverged at t = " +
                                                      std::to_string((k + 1) * cfg.h_ref));
                    xs[i] = xnew[i];
                }
            }
            if (rec_cursor < nrec && record_steps[rec_cursor] == k + 1) record_state(rec_cursor++);
        }
    };

    // Fixed-size unit blocks reduced in block order: the accumulation order
    // (and hence the floating-point result) is independent of thread count.
    const std::uint64_t block = 256;
    const std::uint64_t nblocks = (units + block - 1) / block;
    const int nthreads = std::min<int>(resolve_threads(cfg.threads), static_cast<int>(nblocks));

    std::vector<double> sum(nrec * nmon, 0.0), sumsq(nrec * nmon, 0.0);
    const std::uint64_t window = std::max<std::uint64_t>(nthreads * 4, 16);

    std::vector<std::vector<double>> partial_sum(window), partial_sq(window);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::uint64_t w0 = 0; w0 < nblocks; w0 += window) {
        const std::uint64_t wcount = std::min<std::uint64_t>(window, nblocks - w0);
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next_slot{0};
        auto worker = [&]() {
            std::vector<double> vals(nrec * nmon);
            for (;;) {
                const std::uint64_t slot = next_slot.fetch_add(1);
                if (slot >= wcount) break;
                const std::uint64_t b = w0 + slot;
                auto& ps = partial_sum[slot];
                auto& pq = partial_sq[slot];
                ps.assign(nrec * nmon, 0.0);
                pq.assign(nrec * nmon, 0.0);
                const std::uint64_t lo = b * block;
                const std::uint64_t hi = std::min(units, lo + block);
                try {
                    for (std::uint64_t u = lo; u < hi; ++u) {
                        run_unit(u, vals);
                        for (std::size_t i = 0; i < nrec * nmon; ++i) {
                            ps[i] += vals[i];
                            pq[i] += vals[i] * vals[i];
                        }
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    break;
                }
            }
        };
        if (nthreads == 1) {
            worker();
        } else {
            for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        if (failure) std::rethrow_exception(failure);
        for (std::uint64_t slot = 0; slot < wcount; ++slot)
            for (std::size_t i = 0; i < nrec * nmon; ++i) {
                sum[i] += partial_sum[slot][i];
                sumsq[i] += partial_sq[slot][i];
            }
    }

    SampleStats stats;
    stats.dimension = d;
    stats.moment_order = cfg.moment_order;
    stats.times.resize(nrec);
    stats.moments.assign(nrec, std::vector<double>(nmon, 0.0));
    stats.ses.assign(nrec, std::vector<double>(nmon, 0.0));
    const double nunits = static_cast<double>(units);
    for (std::size_t r = 0; r < nrec; ++r) {
        stats.times[r] = record_steps[r] * cfg.h_ref;
        for (std::size_t p = 0; p < nmon; ++p) {
            const double mean = sum[r * nmon + p] / nunits;
            double var = sumsq[r * nmon + p] / nunits - mean * mean;
            var = std::max(var, 0.0);
            stats.moments[r][p] = mean;
            stats.ses[r][p] = std::sqrt(var / nunits);
        }
        stats.moments[r][0] = 1.0;
        stats.ses[r][0] = 0.0;
    }
    return stats;
}

Cumulants cumulants_from_moments(const MomentTable& m, int coordinate) {
    if (m.max_order() < 4) throw degree_error("cumulants need moments to order 4");
    if (coordinate < 0 || coordinate >= m.dimension())
        throw config_error("cumulant coordinate out of range");
    MultiIndex g(m.dimension(), 0);
    auto mom = [&](int n) {
        g.assign(m.dimension(), 0);
        g[coordinate] = n;
        return m.get(g);
    };
    const double m1 = mom(1), m2 = mom(2), m3 = mom(3), m4 = mom(4);
    Cumulants c;
    c.mean = m1;
    c.variance = m2 - m1 * m1;
    c.k3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
    c.k4 = m4 - 4.0 * m1 * m3 - 3.0 * m2 * m2 + 12.0 * m1 * m1 * m2 - 6.0 * m1 * m1 * m1 * m1;
    if (!(c.variance > 0)) throw numeric_error("degenerate variance in cumulant computation");
    c.skewness = c.k3 / std::pow(c.variance, 1.5);
    c.excess_kurtosis = c.k4 / (c.variance * c.variance);
    return c;
}

Cumulants cumulant_standard_errors(const MomentTable& m, const MomentTable& se, int coordinate) {
    MultiIndex g(m.dimension(), 0);
    auto mom = [&](const MomentTable& t, int n) {
        g.assign(m.dimension(), 0);
        g[coordinate] = n;
        return t.get(g);
    };
    const double m1 = mom(m, 1), m2 = mom(m, 2), m3 = mom(m, 3);
    const double s1 = mom(se, 1), s2 = mom(se, 2), s3 = mom(se, 3), s4 = mom(se, 4);
    auto quad = [](std::initializer_list<double> terms) {
        double s = 0.0;
        for (double t : terms) s += t * t;
        return std::sqrt(s);
    };
    Cumulants c;
    c.mean = s1;
    c.variance = quad({2.0 * m1 * s1, s2});
    c.k3 = quad({(-3.0 * m2 + 6.0 * m1 * m1) * s1, -3.0 * m1 * s2, s3});
    c.k4 = quad({(-4.0 * m3 + 24.0 * m1 * m2 - 24.0 * m1 * m1 * m1) * s1,
                 (-6.0 * m2 + 12.0 * m1 * m1) * s2, -4.0 * m1 * s3, s4});
    return c;
}

}  // namespace rpcsde
