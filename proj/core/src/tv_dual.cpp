#include "linrmdp/tv_dual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "linrmdp/instance.hpp"

namespace linrmdp {

std::vector<double> clip_value(std::span<const double> values, double alpha) {
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = std::min(v, alpha);
    return out;
}

double dual_objective(const DualProblem& p, double alpha) {
    if (alpha < p.lo - kConstructionTol || alpha > p.hi + kConstructionTol)
        throw std::invalid_argument("dual_objective: alpha outside [lo, hi]");
    double acc = 0.0;
    for (std::size_t j = 0; j < p.weights.size(); ++j)
        acc += p.weights[j] * std::min(p.values[j], alpha);
    return acc - p.rho * (alpha - p.floor);
}

namespace detail {

DualMaximum maximize_dual_sorted(std::span<const double> sorted_values,
                                 std::span<const double> weights_sorted, double rho, double floor_m,
                                 double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("maximize_dual: empty alpha interval");
    const std::size_t n = sorted_values.size();

    // prefix[k] = sum of w_j v_j over the k smallest values, wsuffix via total
    double total_w = 0.0;
    std::vector<double> prefix_wv(n + 1, 0.0);
    std::vector<double> prefix_w(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        prefix_wv[k + 1] = prefix_wv[k] + weights_sorted[k] * sorted_values[k];
        prefix_w[k + 1] = prefix_w[k] + weights_sorted[k];
        total_w += weights_sorted[k];
    }

    const auto objective = [&](double alpha) {
        // first index with value strictly above alpha
        const std::size_t k =
            static_cast<std::size_t>(std::upper_bound(sorted_values.begin(), sorted_values.end(),
                                                      alpha) -
                                     sorted_values.begin());
        return prefix_wv[k] + alpha * (total_w - prefix_w[k]) - rho * (alpha - floor_m);
    };

    DualMaximum best{lo, objective(lo)};
    for (std::size_t k = 0; k < n; ++k) {
        const double alpha = sorted_values[k];
        if (alpha <= lo || alpha >= hi) continue;
        const double val = objective(alpha);
        if (val > best.value) best = {alpha, val};
    }
    if (hi > lo) {
        const double val = objective(hi);
        if (val > best.value) best = {hi, val};
    }
    return best;
}

} // namespace detail

DualMaximum maximize_dual(const DualProblem& p) {
    if (p.weights.size() != p.values.size())
        throw std::invalid_argument("maximize_dual: weights/values size mismatch");
    std::vector<std::size_t> order(p.values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p.values[a] < p.values[b]; });
    std::vector<double> v(p.values.size());
    std::vector<double> w(p.values.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        v[k] = p.values[order[k]];
        w[k] = p.weights[order[k]];
    }
    return detail::maximize_dual_sorted(v, w, p.rho, p.floor, p.lo, p.hi);
}

namespace {

void check_simplex(std::span<const double> mu) {
    double sum = 0.0;
    for (double x : mu) {
        if (x < -kConstructionTol)
            throw std::invalid_argument("measure has a negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("measure does not sum to 1");
}

} // namespace

double population_inner(std::span<const double> mu, std::span<const double> values, double rho) {
    check_simplex(mu);
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("population_inner: rho must lie in [0,1]");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    DualProblem p;
    p.weights.assign(mu.begin(), mu.end());
    p.values.assign(values.begin(), values.end());
    p.rho = rho;
    p.floor = *lo_it;
    p.lo = *lo_it;
    p.hi = *hi_it;
    return maximize_dual(p).value;
}

std::vector<double> worst_case_measure(std::span<const double> mu, std::span<const double> values,
                                       double rho) {
    check_simplex(mu);
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("worst_case_measure: rho must lie in [0,1]");
    if (mu.size() != values.size())
        throw std::invalid_argument("worst_case_measure: size mismatch");
    const std::size_t n = mu.size();
    std::vector<double> out(mu.begin(), mu.end());
    if (n <= 1 || rho == 0.0) return out;

    // receiving state: smallest value, ties to the smallest index
    std::size_t target = 0;
    for (std::size_t s = 1; s < n; ++s)
        if (values[s] < values[target]) target = s;

    // donate mass in decreasing value order (ties to the smaller index)
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });

    double budget = std::min(rho, 1.0 - out[target]);
    for (std::size_t s : order) {
        if (budget <= 0.0) break;
        if (s == target) continue;
        const double take = std::min(out[s], budget);
        out[s] -= take;
        out[target] += take;
        budget -= take;
    }
    return out;
}

double brute_force_inner(std::span<const double> mu, std::span<const double> values, double rho) {
    const auto worst = worst_case_measure(mu, values, rho);
    double acc = 0.0;
    for (std::size_t s = 0; s < worst.size(); ++s) acc += worst[s] * values[s];
    return acc;
}

} // namespace linrmdp
