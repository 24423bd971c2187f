#pragma once

#include <vector>

#include "linrmdp/instance.hpp"

namespace linrmdp {

/// Exact solution of the robust Bellman optimality recursion on a finite
/// instance: optimal robust values, the greedy optimal policy, and the
/// per-(h,i) inner values with their maximizing alphas.
struct RobustSolution {
    ValueTable v_star;            // (H+1) x S
    std::vector<double> q_star;   // H x S x A
    DeterministicPolicy pi_star;  // H x S
    std::vector<double> inner;    // H x d: inf over the TV ball of mu_{h,i}^T V_{h+1}
    std::vector<double> inner_alpha; // H x d: maximizing alpha of the dual

    double q(int h, int s, int a, int S, int A) const {
        return q_star[(static_cast<std::size_t>(h) * S + s) * A + a];
    }
};

/// Per-step state-action visitation distribution; each row sums to one.
struct OccupancyTable {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> d; // H x S x A

    double& at(int h, int s, int a) {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double at(int h, int s, int a) const {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

/// One exact backward pass of the robust optimality recursion (finite horizon,
/// no fixed-point iteration needed).
RobustSolution robust_value_iteration(const LinRmdpInstance& instance);

/// Robust value of a fixed deterministic policy.
ValueTable robust_policy_eval(const LinRmdpInstance& instance, const DeterministicPolicy& policy);

/// V*_1(zeta) - V^{pi,rho}_1(zeta); nonnegative up to roundoff.
double suboptimality(const LinRmdpInstance& instance, const DeterministicPolicy& policy);

/// Same, reusing a precomputed optimal solution for the instance.
double suboptimality(const LinRmdpInstance& instance, const RobustSolution& solution,
                     const DeterministicPolicy& policy);

/// Explicit kernel assembled from the per-coordinate worst-case measures of
/// `values`: row (h,s,a) = sum_i phi_i(s,a) * worst measure of mu0_{h,i}
/// against values row h+1.
Kernel worst_case_kernel(const LinRmdpInstance& instance, const ValueTable& values);

/// Plain (non-robust) policy evaluation under an explicit kernel, with the
/// instance supplying rewards.
ValueTable plain_policy_eval(const LinRmdpInstance& instance, const Kernel& kernel,
                             const DeterministicPolicy& policy);

/// Forward occupancy recursion under an explicit kernel.
OccupancyTable occupancy(const Kernel& kernel, const StochasticPolicy& policy,
                         std::span<const double> initial_dist);

/// Occupancy under the nominal kernel.
OccupancyTable occupancy(const LinRmdpInstance& instance, const StochasticPolicy& policy);

/// Smallest eigenvalue over steps of the behavior feature second-moment
/// matrix E[phi phi^T], occupancy taken under the nominal kernel.
double kappa(const LinRmdpInstance& instance, const StochasticPolicy& behavior);

/// Clipped single-policy concentrability evaluated over a finite set of
/// kernels from the uncertainty set:
///
///   d * max over (h, i, P) of min{ E_{d*}[phi_i^2], 1/d } * (B_h^+)_{ii}
///
/// with B_h the behavior feature second moment under the nominal kernel and
/// d* the occupancy of pi_star under P. A lower bound of the full coefficient,
/// which maximizes over the whole uncertainty set. Directions where
/// the numerator vanishes follow the 0/0 = 0 convention; a singular B_h in a
/// direction with positive numerator yields +infinity.
double clipped_concentrability(const LinRmdpInstance& instance, const StochasticPolicy& behavior,
                               const DeterministicPolicy& pi_star,
                               const std::vector<Kernel>& kernels);

/// Unclipped analogue (no min{., 1/d} and no leading d factor).
double unclipped_concentrability(const LinRmdpInstance& instance,
                                 const StochasticPolicy& behavior,
                                 const DeterministicPolicy& pi_star,
                                 const std::vector<Kernel>& kernels);

} // namespace linrmdp
