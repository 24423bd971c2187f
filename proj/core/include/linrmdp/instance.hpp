#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace linrmdp {

/// Thrown by loaders and constructors when structural invariants fail.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::string message) : std::runtime_error(std::move(message)) {}
};

// Tolerances: absolute 1e-12 on quantities fixed at construction, 1e-10 on
// derived quantities (d-term dot products accumulate error).
inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kDerivedTol = 1e-10;

/// Finite-horizon robust linear MDP with a d-rectangular total-variation
/// uncertainty set.
///
/// The model is linear in a known nonnegative feature map phi(s,a) whose
/// coordinates sum to one: rewards are phi(s,a)^T theta_h and the nominal
/// kernel is P0_h(s'|s,a) = phi(s,a)^T mu0_h(s'). Each factor measure
/// mu0_{h,i} lives on the state simplex and may move independently within a
/// TV ball of radius rho.
struct LinRmdpInstance {
    int num_states = 0;   // S
    int num_actions = 0;  // A
    int horizon = 0;      // H
    int dim = 0;          // d

    double rho = 0.0;                // TV radius, clamped to [0,1] on construction
    std::vector<double> initial_dist; // S

    std::vector<double> phi;   // S x A x d, row-major
    std::vector<double> theta; // H x d
    std::vector<double> mu0;   // H x d x S; row (h,i) is the measure mu0_{h,i}

    std::span<const double> features(int s, int a) const {
        return {phi.data() + (static_cast<std::size_t>(s) * num_actions + a) * dim,
                static_cast<std::size_t>(dim)};
    }
    std::span<const double> reward_weights(int h) const {
        return {theta.data() + static_cast<std::size_t>(h) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> measure(int h, int i) const {
        return {mu0.data() + (static_cast<std::size_t>(h) * dim + i) * num_states,
                static_cast<std::size_t>(num_states)};
    }

    double reward(int h, int s, int a) const {
        const auto f = features(s, a);
        const auto w = reward_weights(h);
        double r = 0.0;
        for (int i = 0; i < dim; ++i) r += f[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        return r;
    }
};

/// Returns a copy with the TV radius replaced (clamped to [0,1]).
LinRmdpInstance with_radius(const LinRmdpInstance& instance, double rho);

/// One action index per (h, s).
struct DeterministicPolicy {
    int horizon = 0;
    int num_states = 0;
    std::vector<int> actions; // H x S

    int& at(int h, int s) { return actions[static_cast<std::size_t>(h) * num_states + s]; }
    int at(int h, int s) const { return actions[static_cast<std::size_t>(h) * num_states + s]; }
};

/// Action distribution per (h, s).
struct StochasticPolicy {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> probs; // H x S x A

    std::span<const double> row(int h, int s) const {
        return {probs.data() + (static_cast<std::size_t>(h) * num_states + s) * num_actions,
                static_cast<std::size_t>(num_actions)};
    }
    double& at(int h, int s, int a) {
        return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

StochasticPolicy uniform_policy(int horizon, int num_states, int num_actions);
StochasticPolicy to_stochastic(const DeterministicPolicy& policy, int num_actions);
/// (1 - epsilon) on the base action, epsilon spread uniformly over all actions.
StochasticPolicy epsilon_greedy(const DeterministicPolicy& base, int num_actions, double epsilon);

/// Values over (H+1) x S; row H is identically zero, row h lies in [0, H-h].
struct ValueTable {
    int horizon = 0;
    int num_states = 0;
    std::vector<double> values; // (H+1) x S

    static ValueTable zeros(int horizon, int num_states) {
        ValueTable t;
        t.horizon = horizon;
        t.num_states = num_states;
        t.values.assign(static_cast<std::size_t>(horizon + 1) * num_states, 0.0);
        return t;
    }
    double& at(int h, int s) { return values[static_cast<std::size_t>(h) * num_states + s]; }
    double at(int h, int s) const { return values[static_cast<std::size_t>(h) * num_states + s]; }
    std::span<const double> row(int h) const {
        return {values.data() + static_cast<std::size_t>(h) * num_states,
                static_cast<std::size_t>(num_states)};
    }
};

/// Explicit transition kernel, H x S x A x S.
struct Kernel {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> p;

    std::span<const double> row(int h, int s, int a) const {
        return {p.data() +
                    ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
    std::span<double> row_mut(int h, int s, int a) {
        return {p.data() +
                    ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
};

/// Checks every structural invariant and returns one message per violation,
/// naming the offending indices. Empty report means the instance is valid.
std::vector<std::string> validate(const LinRmdpInstance& instance);

/// Throws ValidationError when validate() reports anything.
void require_valid(const LinRmdpInstance& instance);

/// phi(s,a)^T mu0_h as a distribution over next states.
std::vector<double> nominal_transition(const LinRmdpInstance& instance, int h, int s, int a);

/// Materializes the full nominal kernel.
Kernel nominal_kernel(const LinRmdpInstance& instance);

/// Embeds a tabular MDP: d = S*A, indicator features, one measure row per
/// state-action pair. `transition` is H x S x A x S and `reward` is H x S x A,
/// both row-major.
LinRmdpInstance tabular_embed(int num_states, int num_actions, int horizon,
                              std::span<const double> transition, std::span<const double> reward,
                              double rho, std::span<const double> initial_dist);

/// Seeded random instance; always passes validate().
LinRmdpInstance random_instance(std::uint64_t seed, int num_states, int num_actions, int horizon,
                                int dim, double rho);

} // namespace linrmdp
