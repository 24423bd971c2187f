#include "linrmdp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linrmdp/rng.hpp"

namespace linrmdp {

namespace {

double clamp_radius(double rho) { return std::min(rho, 1.0); }

bool is_simplex(std::span<const double> row, double tol, double* sum_out = nullptr) {
    double sum = 0.0;
    bool nonneg = true;
    for (double x : row) {
        if (x < -tol) nonneg = false;
        sum += x;
    }
    if (sum_out != nullptr) *sum_out = sum;
    return nonneg && std::abs(sum - 1.0) <= tol;
}

} // namespace

LinRmdpInstance with_radius(const LinRmdpInstance& instance, double rho) {
    LinRmdpInstance copy = instance;
    if (rho < 0.0) throw std::invalid_argument("with_radius: rho must be nonnegative");
    copy.rho = clamp_radius(rho);
    return copy;
}

StochasticPolicy uniform_policy(int horizon, int num_states, int num_actions) {
    StochasticPolicy p;
    p.horizon = horizon;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.probs.assign(static_cast<std::size_t>(horizon) * num_states * num_actions,
                   1.0 / num_actions);
    return p;
}

StochasticPolicy to_stochastic(const DeterministicPolicy& policy, int num_actions) {
    StochasticPolicy p;
    p.horizon = policy.horizon;
    p.num_states = policy.num_states;
    p.num_actions = num_actions;
    p.probs.assign(static_cast<std::size_t>(p.horizon) * p.num_states * num_actions, 0.0);
    for (int h = 0; h < p.horizon; ++h)
        for (int s = 0; s < p.num_states; ++s) p.at(h, s, policy.at(h, s)) = 1.0;
    return p;
}

StochasticPolicy epsilon_greedy(const DeterministicPolicy& base, int num_actions, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("epsilon_greedy: epsilon must lie in [0,1]");
    StochasticPolicy p = to_stochastic(base, num_actions);
    for (double& x : p.probs) x *= 1.0 - epsilon;
    for (int h = 0; h < p.horizon; ++h)
        for (int s = 0; s < p.num_states; ++s)
            for (int a = 0; a < num_actions; ++a) p.at(h, s, a) += epsilon / num_actions;
    return p;
}

std::vector<std::string> validate(const LinRmdpInstance& inst) {
    std::vector<std::string> report;
    const auto flag = [&report](std::string msg) { report.push_back(std::move(msg)); };

    if (inst.num_states <= 0 || inst.num_actions <= 0 || inst.horizon <= 0 || inst.dim <= 0) {
        flag("dimensions must be positive counts");
        return report;
    }
    const std::size_t S = static_cast<std::size_t>(inst.num_states);
    const std::size_t A = static_cast<std::size_t>(inst.num_actions);
    const std::size_t H = static_cast<std::size_t>(inst.horizon);
    const std::size_t d = static_cast<std::size_t>(inst.dim);
    if (inst.phi.size() != S * A * d || inst.theta.size() != H * d ||
        inst.mu0.size() != H * d * S || inst.initial_dist.size() != S) {
        flag("array sizes inconsistent with (S, A, H, d)");
        return report;
    }

    if (inst.rho < 0.0) flag("rho is negative");
    if (inst.rho > 1.0) flag("rho exceeds 1 (TV radius saturates at 1)");

    double zeta_sum = 0.0;
    if (!is_simplex(inst.initial_dist, kConstructionTol, &zeta_sum))
        flag("initial distribution is not in the simplex (sum " + std::to_string(zeta_sum) + ")");

    for (int s = 0; s < inst.num_states; ++s) {
        for (int a = 0; a < inst.num_actions; ++a) {
            const auto f = inst.features(s, a);
            double sum = 0.0;
            for (int i = 0; i < inst.dim; ++i) {
                const double x = f[static_cast<std::size_t>(i)];
                if (x < -kConstructionTol)
                    flag("phi_" + std::to_string(i) + "(s=" + std::to_string(s) +
                         ",a=" + std::to_string(a) + ") is negative");
                sum += x;
            }
            if (std::abs(sum - 1.0) > kConstructionTol)
                flag("phi(s=" + std::to_string(s) + ",a=" + std::to_string(a) +
                     ") coordinates sum to " + std::to_string(sum) + ", expected 1");
        }
    }

    for (int h = 0; h < inst.horizon; ++h) {
        for (int i = 0; i < inst.dim; ++i) {
            double sum = 0.0;
            if (!is_simplex(inst.measure(h, i), kConstructionTol, &sum))
                flag("measure mu0(h=" + std::to_string(h) + ",i=" + std::to_string(i) +
                     ") is not in the simplex (sum " + std::to_string(sum) + ")");
        }
    }

    for (int h = 0; h < inst.horizon; ++h)
        for (int s = 0; s < inst.num_states; ++s)
            for (int a = 0; a < inst.num_actions; ++a) {
                const double r = inst.reward(h, s, a);
                if (r < -kDerivedTol || r > 1.0 + kDerivedTol)
                    flag("reward(h=" + std::to_string(h) + ",s=" + std::to_string(s) +
                         ",a=" + std::to_string(a) + ") = " + std::to_string(r) +
                         " lies outside [0,1]");
            }

    return report;
}

void require_valid(const LinRmdpInstance& instance) {
    const auto report = validate(instance);
    if (report.empty()) return;
    std::string msg = "invalid instance:";
    for (const auto& line : report) msg += "\n  - " + line;
    throw ValidationError(msg);
}

std::vector<double> nominal_transition(const LinRmdpInstance& inst, int h, int s, int a) {
    if (h < 0 || h >= inst.horizon || s < 0 || s >= inst.num_states || a < 0 ||
        a >= inst.num_actions)
        throw std::out_of_range("nominal_transition: index out of range");
    std::vector<double> out(static_cast<std::size_t>(inst.num_states), 0.0);
    const auto f = inst.features(s, a);
    for (int i = 0; i < inst.dim; ++i) {
        const double fi = f[static_cast<std::size_t>(i)];
        if (fi == 0.0) continue;
        const auto mu = inst.measure(h, i);
        for (int sp = 0; sp < inst.num_states; ++sp)
            out[static_cast<std::size_t>(sp)] += fi * mu[static_cast<std::size_t>(sp)];
    }
    return out;
}

Kernel nominal_kernel(const LinRmdpInstance& inst) {
    Kernel k;
    k.horizon = inst.horizon;
    k.num_states = inst.num_states;
    k.num_actions = inst.num_actions;
    k.p.resize(static_cast<std::size_t>(inst.horizon) * inst.num_states * inst.num_actions *
               inst.num_states);
    for (int h = 0; h < inst.horizon; ++h)
        for (int s = 0; s < inst.num_states; ++s)
            for (int a = 0; a < inst.num_actions; ++a) {
                const auto row = nominal_transition(inst, h, s, a);
                std::copy(row.begin(), row.end(), k.row_mut(h, s, a).begin());
            }
    return k;
}

LinRmdpInstance tabular_embed(int num_states, int num_actions, int horizon,
                              std::span<const double> transition, std::span<const double> reward,
                              double rho, std::span<const double> initial_dist) {
    const std::size_t S = static_cast<std::size_t>(num_states);
    const std::size_t A = static_cast<std::size_t>(num_actions);
    const std::size_t H = static_cast<std::size_t>(horizon);
    if (transition.size() != H * S * A * S || reward.size() != H * S * A ||
        initial_dist.size() != S)
        throw std::invalid_argument("tabular_embed: array sizes inconsistent");
    for (std::size_t idx = 0; idx < H * S * A; ++idx) {
        if (!is_simplex(transition.subspan(idx * S, S), kConstructionTol))
            throw std::invalid_argument("tabular_embed: transition row " + std::to_string(idx) +
                                        " is not a probability vector");
        if (reward[idx] < 0.0 || reward[idx] > 1.0)
            throw std::invalid_argument("tabular_embed: reward outside [0,1]");
    }
    if (rho < 0.0) throw std::invalid_argument("tabular_embed: rho must be nonnegative");

    LinRmdpInstance inst;
    inst.num_states = num_states;
    inst.num_actions = num_actions;
    inst.horizon = horizon;
    inst.dim = num_states * num_actions;
    inst.rho = clamp_radius(rho);
    inst.initial_dist.assign(initial_dist.begin(), initial_dist.end());

    const std::size_t d = S * A;
    inst.phi.assign(S * A * d, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t coord = s * A + a;
            inst.phi[(s * A + a) * d + coord] = 1.0;
        }

    inst.theta.assign(H * d, 0.0);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t coord = 0; coord < d; ++coord)
            inst.theta[h * d + coord] = reward[h * S * A + coord];

    inst.mu0.assign(H * d * S, 0.0);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t coord = 0; coord < d; ++coord)
            for (std::size_t sp = 0; sp < S; ++sp)
                inst.mu0[(h * d + coord) * S + sp] = transition[(h * S * A + coord) * S + sp];

    return inst;
}

LinRmdpInstance random_instance(std::uint64_t seed, int num_states, int num_actions, int horizon,
                                int dim, double rho) {
    if (dim < 1) throw std::invalid_argument("random_instance: dim must be at least 1");
    Rng rng(derive_seed(seed, 0, seed_tag::instance));

    LinRmdpInstance inst;
    inst.num_states = num_states;
    inst.num_actions = num_actions;
    inst.horizon = horizon;
    inst.dim = dim;
    inst.rho = clamp_radius(std::max(rho, 0.0));

    inst.initial_dist.resize(static_cast<std::size_t>(num_states));
    rng.simplex(inst.initial_dist);

    inst.phi.resize(static_cast<std::size_t>(num_states) * num_actions * dim);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            std::span<double> row{inst.phi.data() +
                                      (static_cast<std::size_t>(s) * num_actions + a) * dim,
                                  static_cast<std::size_t>(dim)};
            rng.simplex(row);
        }

    // theta in [0,1]^d keeps rewards in [0,1] because feature rows sum to one
    inst.theta.resize(static_cast<std::size_t>(horizon) * dim);
    for (double& x : inst.theta) x = rng.u01();

    inst.mu0.resize(static_cast<std::size_t>(horizon) * dim * num_states);
    for (int h = 0; h < horizon; ++h)
        for (int i = 0; i < dim; ++i) {
            std::span<double> row{inst.mu0.data() +
                                      (static_cast<std::size_t>(h) * dim + i) * num_states,
                                  static_cast<std::size_t>(num_states)};
            rng.simplex(row);
        }

    return inst;
}

} // namespace linrmdp
