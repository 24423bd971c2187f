#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linrmdp/instance.hpp"
#include "linrmdp/numerics.hpp"
#include "linrmdp/offline_data.hpp"

namespace linrmdp {

/// What the offline solvers are allowed to see of an instance: index spaces
/// and the feature map. Rewards reach the solver only through dataset tuples;
/// theta and the nominal measures stay hidden.
struct FeatureView {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int dim = 0;
    const double* phi_data = nullptr; // S x A x d, row-major

    std::span<const double> features(int s, int a) const {
        return {phi_data + (static_cast<std::size_t>(s) * num_actions + a) * dim,
                static_cast<std::size_t>(dim)};
    }
};

inline FeatureView feature_view(const LinRmdpInstance& instance) {
    return {instance.num_states, instance.num_actions, instance.horizon, instance.dim,
            instance.phi.data()};
}

/// Solver parameters. Unset lambda/gamma fall back to the theoretical
/// schedule: lambda0 = 1 and gamma0 = 6 sqrt(d * log(3HK/delta)) * H, with K
/// the trajectory count of the full dataset.
struct DropConfig {
    double rho = 0.0;
    double delta = 0.1;
    long long num_trajectories = 0; // K, used inside the log term
    std::optional<double> lambda0;
    std::optional<double> gamma0;

    double resolved_lambda() const { return lambda0.value_or(1.0); }
    double resolved_gamma(int horizon, int dim) const;
};

/// Per-step solver diagnostics.
struct StepDiagnostics {
    PsdMatrix gram;                  // Lambda_h (or Sigma_h for the weighted fit)
    std::vector<double> theta_hat;   // d
    std::vector<double> nu_hat;      // d
    double penalty_min = 0.0;
    double penalty_max = 0.0;
    double sigma2_min = 1.0;
    double sigma2_max = 1.0;
    long long n_samples = 0;
};

struct SolverOutput {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int dim = 0;

    std::vector<double> q;       // H x S x A, clamped to [0, H-h]
    ValueTable v;                // (H+1) x S
    DeterministicPolicy policy;  // greedy, ties to the smallest action
    std::vector<double> penalty; // H x S x A

    std::vector<StepDiagnostics> steps;
    double gamma = 0.0;
    double lambda = 0.0;
    long long n_samples = 0; // total tuples consumed across steps
    std::vector<std::string> warnings;

    double q_at(int h, int s, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double penalty_at(int h, int s, int a) const {
        return penalty[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

/// Ridge estimate of the reward weights at one step:
/// theta_hat = Gram^{-1} sum_t phi_t r_t / sigma2_t.
std::vector<double> ridge_theta(const FeatureView& view, std::span<const Transition> samples,
                                const CholeskyFactor& gram, std::span<const double> sample_weights);

/// Per-coordinate dual maximization against the next-step value function.
/// Weight of sample t in coordinate i is (Gram^{-1} c_t phi_t)_i with
/// c_t = sample_weights[t]; the alpha interval and floor come from v_next over
/// the full state space.
std::vector<double> empirical_nu(const FeatureView& view, std::span<const Transition> samples,
                                 const CholeskyFactor& gram, std::span<const double> sample_weights,
                                 std::span<const double> v_next, double rho);

/// gamma * sum_i |phi_i(s,a)| sqrt((Gram^{-1})_{ii}); inverse_diag is the
/// precomputed diagonal of the Gram inverse.
double penalty(std::span<const double> phi, std::span<const double> inverse_diag, double gamma);

/// Backward pessimistic least-squares value iteration with the TV dual
/// update. One pass h = H-1 .. 0; Q is clamped into [0, H-h]; the greedy
/// policy breaks ties toward the smaller action index.
SolverOutput fit(const FeatureView& view, const OfflineDataset& data, const DropConfig& config);

namespace detail {
/// Shared core of the unweighted and variance-weighted fits. `sigma2` is
/// either null (all-ones weights) or an H x S x A table of positive variances;
/// sample t at step h contributes with weight 1 / sigma2(h, s_t, a_t).
SolverOutput pessimistic_lsvi(const FeatureView& view, const OfflineDataset& data,
                              const std::vector<double>* sigma2, double lambda, double gamma,
                              double rho);
} // namespace detail

} // namespace linrmdp
