#pragma once

#include <span>
#include <vector>

namespace linrmdp {

/// One-dimensional dual of the total-variation robust inner problem
///
///     max over alpha in [lo, hi] of  sum_j w_j * min(v_j, alpha) - rho * (alpha - m)
///
/// For a population measure, w is the measure restricted to its support, m is
/// min_s V(s) over the full state space, and [lo, hi] = [min V, max V]. For
/// ridge-regression estimates the weights are rows of Gram^{-1} Phi^T and may
/// be negative, so the objective need not be concave.
struct DualProblem {
    std::vector<double> weights; // signed allowed
    std::vector<double> values;  // same length as weights
    double rho = 0.0;
    double floor = 0.0; // m: min of the value function over the full state space
    double lo = 0.0;
    double hi = 0.0;
};

/// Elementwise min(v_j, alpha).
std::vector<double> clip_value(std::span<const double> values, double alpha);

/// Dual objective at a fixed alpha; alpha must lie in [lo, hi].
double dual_objective(const DualProblem& p, double alpha);

struct DualMaximum {
    double alpha = 0.0;
    double value = 0.0;
};

/// Exact maximization by breakpoint enumeration. The objective is piecewise
/// linear with breakpoints at the sample values, so the maximum is attained
/// at a breakpoint or an interval endpoint; ties resolve to the smallest
/// maximizing alpha. O(n log n).
DualMaximum maximize_dual(const DualProblem& p);

namespace detail {
/// Breakpoint maximization over values already sorted ascending, with weights
/// carried in the same order. Shared by the per-coordinate solver loop, which
/// sorts the sample values once and reuses the permutation for all d rows.
DualMaximum maximize_dual_sorted(std::span<const double> sorted_values,
                                 std::span<const double> weights_sorted, double rho, double floor_m,
                                 double lo, double hi);
} // namespace detail

/// Exact value of inf over the TV ball of mu^T V via the dual form.
/// `mu` must lie in the simplex.
double population_inner(std::span<const double> mu, std::span<const double> values, double rho);

/// Independent primal oracle: solves the same infimum by greedy transport,
/// moving mass from high-value states onto the minimizing state.
double brute_force_inner(std::span<const double> mu, std::span<const double> values, double rho);

/// The measure achieving brute_force_inner.
std::vector<double> worst_case_measure(std::span<const double> mu, std::span<const double> values,
                                       double rho);

} // namespace linrmdp
