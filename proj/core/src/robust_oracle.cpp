#include "linrmdp/robust_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "linrmdp/numerics.hpp"
#include "linrmdp/tv_dual.hpp"

namespace linrmdp {

namespace {

void check_policy_shape(const LinRmdpInstance& inst, const DeterministicPolicy& policy) {
    if (policy.horizon != inst.horizon || policy.num_states != inst.num_states)
        throw std::invalid_argument("policy shape mismatch");
    for (int a : policy.actions)
        if (a < 0 || a >= inst.num_actions)
            throw std::invalid_argument("policy action out of range");
}

/// Shared backward recursion. `choose_action` returns the action used at
/// (h, s) given the S x A row of Q values for step h.
template <typename ChooseAction>
void robust_backward(const LinRmdpInstance& inst, ChooseAction&& choose_action, ValueTable& v,
                     std::vector<double>* q_out, std::vector<double>* inner_out,
                     std::vector<double>* alpha_out, DeterministicPolicy* pi_out) {
    const int S = inst.num_states, A = inst.num_actions, H = inst.horizon, d = inst.dim;
    std::vector<double> inner(static_cast<std::size_t>(d));
    for (int h = H - 1; h >= 0; --h) {
        const auto v_next = v.row(h + 1);
        const auto [lo_it, hi_it] = std::minmax_element(v_next.begin(), v_next.end());
        for (int i = 0; i < d; ++i) {
            DualProblem p;
            const auto mu = inst.measure(h, i);
            p.weights.assign(mu.begin(), mu.end());
            p.values.assign(v_next.begin(), v_next.end());
            p.rho = inst.rho;
            p.floor = *lo_it;
            p.lo = *lo_it;
            p.hi = *hi_it;
            const DualMaximum m = maximize_dual(p);
            inner[static_cast<std::size_t>(i)] = m.value;
            if (inner_out != nullptr) {
                (*inner_out)[static_cast<std::size_t>(h) * d + i] = m.value;
                (*alpha_out)[static_cast<std::size_t>(h) * d + i] = m.alpha;
            }
        }
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const auto f = inst.features(s, a);
                double q = inst.reward(h, s, a);
                for (int i = 0; i < d; ++i)
                    q += f[static_cast<std::size_t>(i)] * inner[static_cast<std::size_t>(i)];
                if (q_out != nullptr)
                    (*q_out)[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            const int a_used = choose_action(h, s, best_a);
            if (pi_out != nullptr) pi_out->at(h, s) = best_a;
            if (a_used == best_a) {
                v.at(h, s) = best;
            } else {
                const auto f = inst.features(s, a_used);
                double q = inst.reward(h, s, a_used);
                for (int i = 0; i < d; ++i)
                    q += f[static_cast<std::size_t>(i)] * inner[static_cast<std::size_t>(i)];
                v.at(h, s) = q;
            }
        }
    }
}

} // namespace

RobustSolution robust_value_iteration(const LinRmdpInstance& inst) {
    require_valid(inst);
    RobustSolution sol;
    sol.v_star = ValueTable::zeros(inst.horizon, inst.num_states);
    sol.q_star.assign(static_cast<std::size_t>(inst.horizon) * inst.num_states * inst.num_actions,
                      0.0);
    sol.inner.assign(static_cast<std::size_t>(inst.horizon) * inst.dim, 0.0);
    sol.inner_alpha.assign(static_cast<std::size_t>(inst.horizon) * inst.dim, 0.0);
    sol.pi_star.horizon = inst.horizon;
    sol.pi_star.num_states = inst.num_states;
    sol.pi_star.actions.assign(static_cast<std::size_t>(inst.horizon) * inst.num_states, 0);
    robust_backward(
        inst, [](int, int, int best_a) { return best_a; }, sol.v_star, &sol.q_star, &sol.inner,
        &sol.inner_alpha, &sol.pi_star);
    return sol;
}

ValueTable robust_policy_eval(const LinRmdpInstance& inst, const DeterministicPolicy& policy) {
    check_policy_shape(inst, policy);
    ValueTable v = ValueTable::zeros(inst.horizon, inst.num_states);
    robust_backward(
        inst, [&policy](int h, int s, int) { return policy.at(h, s); }, v, nullptr, nullptr,
        nullptr, nullptr);
    return v;
}

double suboptimality(const LinRmdpInstance& inst, const RobustSolution& solution,
                     const DeterministicPolicy& policy) {
    const ValueTable v_pi = robust_policy_eval(inst, policy);
    double gap = 0.0;
    for (int s = 0; s < inst.num_states; ++s)
        gap += inst.initial_dist[static_cast<std::size_t>(s)] *
               (solution.v_star.at(0, s) - v_pi.at(0, s));
    return gap;
}

double suboptimality(const LinRmdpInstance& inst, const DeterministicPolicy& policy) {
    return suboptimality(inst, robust_value_iteration(inst), policy);
}

Kernel worst_case_kernel(const LinRmdpInstance& inst, const ValueTable& values) {
    if (values.horizon != inst.horizon || values.num_states != inst.num_states)
        throw std::invalid_argument("worst_case_kernel: value table shape mismatch");
    const int S = inst.num_states, A = inst.num_actions, H = inst.horizon, d = inst.dim;
    Kernel k;
    k.horizon = H;
    k.num_states = S;
    k.num_actions = A;
    k.p.assign(static_cast<std::size_t>(H) * S * A * S, 0.0);

    std::vector<std::vector<double>> worst(static_cast<std::size_t>(d));
    for (int h = 0; h < H; ++h) {
        const auto v_next = values.row(h + 1);
        for (int i = 0; i < d; ++i)
            worst[static_cast<std::size_t>(i)] =
                worst_case_measure(inst.measure(h, i), v_next, inst.rho);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const auto f = inst.features(s, a);
                auto row = k.row_mut(h, s, a);
                for (int i = 0; i < d; ++i) {
                    const double fi = f[static_cast<std::size_t>(i)];
                    if (fi == 0.0) continue;
                    const auto& mu = worst[static_cast<std::size_t>(i)];
                    for (int sp = 0; sp < S; ++sp)
                        row[static_cast<std::size_t>(sp)] += fi * mu[static_cast<std::size_t>(sp)];
                }
            }
    }
    return k;
}

ValueTable plain_policy_eval(const LinRmdpInstance& inst, const Kernel& kernel,
                             const DeterministicPolicy& policy) {
    check_policy_shape(inst, policy);
    if (kernel.horizon != inst.horizon || kernel.num_states != inst.num_states ||
        kernel.num_actions != inst.num_actions)
        throw std::invalid_argument("plain_policy_eval: kernel shape mismatch");
    ValueTable v = ValueTable::zeros(inst.horizon, inst.num_states);
    for (int h = inst.horizon - 1; h >= 0; --h) {
        const auto v_next = v.row(h + 1);
        for (int s = 0; s < inst.num_states; ++s) {
            const int a = policy.at(h, s);
            double q = inst.reward(h, s, a);
            const auto row = kernel.row(h, s, a);
            for (int sp = 0; sp < inst.num_states; ++sp)
                q += row[static_cast<std::size_t>(sp)] * v_next[static_cast<std::size_t>(sp)];
            v.at(h, s) = q;
        }
    }
    return v;
}

OccupancyTable occupancy(const Kernel& kernel, const StochasticPolicy& policy,
                         std::span<const double> initial_dist) {
    const int H = kernel.horizon, S = kernel.num_states, A = kernel.num_actions;
    if (policy.horizon != H || policy.num_states != S || policy.num_actions != A)
        throw std::invalid_argument("occupancy: policy shape mismatch");
    if (static_cast<int>(initial_dist.size()) != S)
        throw std::invalid_argument("occupancy: initial distribution size mismatch");

    OccupancyTable table;
    table.horizon = H;
    table.num_states = S;
    table.num_actions = A;
    table.d.assign(static_cast<std::size_t>(H) * S * A, 0.0);

    std::vector<double> state_dist(initial_dist.begin(), initial_dist.end());
    std::vector<double> next_dist(static_cast<std::size_t>(S));
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const auto pi_row = policy.row(h, s);
            for (int a = 0; a < A; ++a)
                table.at(h, s, a) = state_dist[static_cast<std::size_t>(s)] *
                                    pi_row[static_cast<std::size_t>(a)];
        }
        if (h + 1 == H) break;
        std::fill(next_dist.begin(), next_dist.end(), 0.0);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const double mass = table.at(h, s, a);
                if (mass == 0.0) continue;
                const auto row = kernel.row(h, s, a);
                for (int sp = 0; sp < S; ++sp)
                    next_dist[static_cast<std::size_t>(sp)] += mass * row[static_cast<std::size_t>(sp)];
            }
        state_dist = next_dist;
    }
    return table;
}

OccupancyTable occupancy(const LinRmdpInstance& inst, const StochasticPolicy& policy) {
    return occupancy(nominal_kernel(inst), policy, inst.initial_dist);
}

namespace {

/// E_{occupancy}[phi phi^T] for one step.
PsdMatrix feature_second_moment(const LinRmdpInstance& inst, const OccupancyTable& occ, int h) {
    PsdMatrix m(inst.dim);
    for (int s = 0; s < inst.num_states; ++s)
        for (int a = 0; a < inst.num_actions; ++a) {
            const double mass = occ.at(h, s, a);
            if (mass == 0.0) continue;
            m.add_outer(inst.features(s, a), mass);
        }
    return m;
}

struct PinvDiag {
    std::vector<double> diag;        // (B^+)_{ii}
    std::vector<bool> in_range;      // e_i in range(B)?
};

PinvDiag pseudo_inverse_diagonal(const PsdMatrix& b) {
    const SymEigen eig = sym_eigen(b);
    const int n = b.dim;
    const double lambda_max = eig.values.empty() ? 0.0 : std::abs(eig.values.back());
    const double tol = std::max(lambda_max, 1.0) * 1e-12;
    PinvDiag out;
    out.diag.assign(static_cast<std::size_t>(n), 0.0);
    out.in_range.assign(static_cast<std::size_t>(n), true);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        double null_mass = 0.0;
        for (int k = 0; k < n; ++k) {
            const double comp = eig.vectors[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            if (eig.values[static_cast<std::size_t>(k)] > tol)
                acc += comp * comp / eig.values[static_cast<std::size_t>(k)];
            else
                null_mass += comp * comp;
        }
        out.diag[static_cast<std::size_t>(i)] = acc;
        out.in_range[static_cast<std::size_t>(i)] = null_mass <= 1e-9;
    }
    return out;
}

double concentrability_impl(const LinRmdpInstance& inst, const StochasticPolicy& behavior,
                            const DeterministicPolicy& pi_star, const std::vector<Kernel>& kernels,
                            bool clipped) {
    require_valid(inst);
    check_policy_shape(inst, pi_star);
    const int H = inst.horizon, d = inst.dim;
    const OccupancyTable occ_b = occupancy(inst, behavior);
    const StochasticPolicy pi_star_stoch = to_stochastic(pi_star, inst.num_actions);

    // per-step pseudo-inverse diagonals of the behavior second moment
    std::vector<PinvDiag> pinv(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h)
        pinv[static_cast<std::size_t>(h)] = pseudo_inverse_diagonal(feature_second_moment(inst, occ_b, h));

    double best = 0.0;
    for (const Kernel& kernel : kernels) {
        const OccupancyTable occ_star = occupancy(kernel, pi_star_stoch, inst.initial_dist);
        for (int h = 0; h < H; ++h) {
            for (int i = 0; i < d; ++i) {
                double num = 0.0;
                for (int s = 0; s < inst.num_states; ++s)
                    for (int a = 0; a < inst.num_actions; ++a) {
                        const double mass = occ_star.at(h, s, a);
                        if (mass == 0.0) continue;
                        const double fi = inst.features(s, a)[static_cast<std::size_t>(i)];
                        num += mass * fi * fi;
                    }
                if (num <= 0.0) continue; // 0/0 = 0 convention
                if (clipped) num = std::min(num, 1.0 / d);
                if (!pinv[static_cast<std::size_t>(h)].in_range[static_cast<std::size_t>(i)])
                    return std::numeric_limits<double>::infinity();
                best = std::max(best,
                                num * pinv[static_cast<std::size_t>(h)].diag[static_cast<std::size_t>(i)]);
            }
        }
    }
    return clipped ? d * best : best;
}

} // namespace

double kappa(const LinRmdpInstance& inst, const StochasticPolicy& behavior) {
    require_valid(inst);
    const OccupancyTable occ = occupancy(inst, behavior);
    double smallest = std::numeric_limits<double>::infinity();
    for (int h = 0; h < inst.horizon; ++h) {
        const auto [lo, hi] = sym_eigen_extremes(feature_second_moment(inst, occ, h));
        (void)hi;
        smallest = std::min(smallest, lo);
    }
    return smallest;
}

double clipped_concentrability(const LinRmdpInstance& inst, const StochasticPolicy& behavior,
                               const DeterministicPolicy& pi_star,
                               const std::vector<Kernel>& kernels) {
    return concentrability_impl(inst, behavior, pi_star, kernels, /*clipped=*/true);
}

double unclipped_concentrability(const LinRmdpInstance& inst, const StochasticPolicy& behavior,
                                 const DeterministicPolicy& pi_star,
                                 const std::vector<Kernel>& kernels) {
    return concentrability_impl(inst, behavior, pi_star, kernels, /*clipped=*/false);
}

} // namespace linrmdp
