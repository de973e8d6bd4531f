#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rpcsde/orthopoly.hpp"
#include "rpcsde/polyalg.hpp"

namespace rpcsde {

// Initial component `target` is a jittered frozen copy of component `source`:
// X_target(0) = X_source(0) + jitter_sd * Z with Z independent standard normal.
// The jitter keeps the initial Hankel matrix positive definite while leaving
// Cov(X_i(t), X_source(0)) unchanged.
struct CopyLink {
    int target;
    int source;
    double jitter_sd;
};

struct ModelSpec {
    std::string name;
    int dim = 0;
    int noise_dim = 0;
    std::vector<MvPoly> drift;                   // d polynomials in d variables
    std::vector<std::vector<MvPoly>> diffusion;  // d x m polynomials
    InitialDistribution initial;
    std::vector<CopyLink> copies;
    double default_h = 0.01;
    double default_T = 1.0;
    // Drift written in d+1 variables with the last variable standing for a
    // random coefficient; present for models that support parameter augmentation.
    std::optional<std::vector<MvPoly>> param_drift;

    void validate() const;
    int max_drift_degree() const;
    int max_diffusion_degree() const;
};

// Paper benchmark systems, fully parameterized.  Recognized names:
// ex41, ex41_random_coeff, ex42, ex43_case1, ex43_case2, lorenz96.
// Overrides are per-model scalar parameters (see README); unknown keys throw.
ModelSpec build_example(const std::string& name,
                        const std::map<std::string, double>& overrides = {});

// Append a frozen random coefficient (d xi = 0).  Models carrying a
// param_drift form couple the new variable into the drift; otherwise the
// dynamics are lifted unchanged.
ModelSpec augment_parameter(const ModelSpec& model, const DistComponent& dist);

// Append a frozen jittered copy of component `source`, enabling
// Cov(X_i(t), X_source(0)) as an ordinary mixed second moment.
ModelSpec augment_initial_copy(const ModelSpec& model, int source, double jitter_sd);

// Sigma^{(i,l)} = sum_j sigma^{(i,j)} sigma^{(l,j)}, symmetric, degree <= 2 max deg sigma.
std::vector<std::vector<MvPoly>> diffusion_covariance(const ModelSpec& model);

// Frozen deterministic components (Constant initial, zero drift and diffusion)
// make the joint law degenerate, so the steppers substitute them into the
// remaining polynomials and reinstate their moment factors afterwards.
struct ReducedModel {
    ModelSpec model;                              // live components only
    std::vector<int> kept;                        // live -> original index
    std::vector<std::pair<int, double>> folded;   // original index -> value
};

ReducedModel fold_constant_components(const ModelSpec& model);

// Inflate a reduced moment table back to the full component set:
// m_full(gamma) = prod_folded c^gamma_f * m_reduced(gamma_kept).
std::vector<double> inflate_moments(const ReducedModel& reduced, int full_dim, int order,
                                    const std::vector<double>& reduced_moments);

// Joint initial moments to max_order, honoring copy links.
MomentTable initial_moment_table(const ModelSpec& model, int max_order);

}  // namespace rpcsde
