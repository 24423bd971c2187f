#include "linrmdp/drop_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "linrmdp/tv_dual.hpp"

namespace linrmdp {

double DropConfig::resolved_gamma(int horizon, int dim) const {
    if (gamma0.has_value()) return *gamma0;
    const double k = static_cast<double>(std::max<long long>(num_trajectories, 1));
    const double xi0 = std::log(3.0 * horizon * k / delta);
    return 6.0 * std::sqrt(dim * xi0) * horizon;
}

std::vector<double> ridge_theta(const FeatureView& view, std::span<const Transition> samples,
                                const CholeskyFactor& gram,
                                std::span<const double> sample_weights) {
    std::vector<double> rhs(static_cast<std::size_t>(view.dim), 0.0);
    for (std::size_t t = 0; t < samples.size(); ++t) {
        const auto f = view.features(samples[t].state, samples[t].action);
        const double wr = sample_weights[t] * samples[t].reward;
        for (int i = 0; i < view.dim; ++i) rhs[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)] * wr;
    }
    return gram.solve(rhs);
}

std::vector<double> empirical_nu(const FeatureView& view, std::span<const Transition> samples,
                                 const CholeskyFactor& gram,
                                 std::span<const double> sample_weights,
                                 std::span<const double> v_next, double rho) {
    const int d = view.dim;
    const std::size_t n = samples.size();
    const auto [lo_it, hi_it] = std::minmax_element(v_next.begin(), v_next.end());
    const double lo = *lo_it, hi = *hi_it;

    // regression weight of sample t in coordinate i: (Gram^{-1} c_t phi_t)_i
    std::vector<std::vector<double>> coord_weights(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto f = view.features(samples[t].state, samples[t].action);
        std::vector<double> scaled(f.begin(), f.end());
        for (double& x : scaled) x *= sample_weights[t];
        coord_weights[t] = gram.solve(scaled);
    }

    // one shared sort of the sample values; all d dual problems reuse it
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v_next[static_cast<std::size_t>(samples[a].next_state)] <
               v_next[static_cast<std::size_t>(samples[b].next_state)];
    });
    std::vector<double> sorted_values(n);
    for (std::size_t k = 0; k < n; ++k)
        sorted_values[k] = v_next[static_cast<std::size_t>(samples[order[k]].next_state)];

    std::vector<double> nu(static_cast<std::size_t>(d), 0.0);
    std::vector<double> w(n);
    for (int i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < n; ++k)
            w[k] = coord_weights[order[k]][static_cast<std::size_t>(i)];
        nu[static_cast<std::size_t>(i)] =
            detail::maximize_dual_sorted(sorted_values, w, rho, lo, lo, hi).value;
    }
    return nu;
}

double penalty(std::span<const double> phi, std::span<const double> inverse_diag, double gamma) {
    double acc = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        acc += std::abs(phi[i]) * std::sqrt(inverse_diag[i]);
    return gamma * acc;
}

namespace detail {

SolverOutput pessimistic_lsvi(const FeatureView& view, const OfflineDataset& data,
                              const std::vector<double>* sigma2, double lambda, double gamma,
                              double rho) {
    const int S = view.num_states, A = view.num_actions, H = view.horizon, d = view.dim;
    if (data.horizon != H) throw std::invalid_argument("fit: dataset horizon mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("fit: lambda must be positive");
    if (gamma < 0.0) throw std::invalid_argument("fit: gamma must be nonnegative");

    SolverOutput out;
    out.num_states = S;
    out.num_actions = A;
    out.horizon = H;
    out.dim = d;
    out.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    out.penalty.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    out.v = ValueTable::zeros(H, S);
    out.policy.horizon = H;
    out.policy.num_states = S;
    out.policy.actions.assign(static_cast<std::size_t>(H) * S, 0);
    out.steps.resize(static_cast<std::size_t>(H));
    out.gamma = gamma;
    out.lambda = lambda;

    std::vector<double> sample_weights;
    std::vector<double> w_sum(static_cast<std::size_t>(d));
    for (int h = H - 1; h >= 0; --h) {
        const auto& samples = data.steps[static_cast<std::size_t>(h)];
        const std::size_t n = samples.size();
        out.n_samples += static_cast<long long>(n);

        sample_weights.assign(n, 1.0);
        double s2_min = 1.0, s2_max = 1.0;
        if (sigma2 != nullptr) {
            s2_min = std::numeric_limits<double>::infinity();
            s2_max = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                const auto& tr = samples[t];
                if (tr.state < 0 || tr.state >= S || tr.action < 0 || tr.action >= A ||
                    tr.next_state < 0 || tr.next_state >= S)
                    throw std::out_of_range("fit: dataset index out of instance range");
                const double s2 =
                    (*sigma2)[(static_cast<std::size_t>(h) * S + tr.state) * A + tr.action];
                if (!(s2 > 0.0)) throw std::invalid_argument("fit: nonpositive variance weight");
                sample_weights[t] = 1.0 / s2;
                s2_min = std::min(s2_min, s2);
                s2_max = std::max(s2_max, s2);
            }
            if (n == 0) s2_min = s2_max = 1.0;
        } else {
            for (const auto& tr : samples)
                if (tr.state < 0 || tr.state >= S || tr.action < 0 || tr.action >= A ||
                    tr.next_state < 0 || tr.next_state >= S)
                    throw std::out_of_range("fit: dataset index out of instance range");
        }

        std::vector<std::span<const double>> feats(n);
        for (std::size_t t = 0; t < n; ++t)
            feats[t] = view.features(samples[t].state, samples[t].action);
        PsdMatrix gram_matrix = gram_accumulate(d, feats, sample_weights, lambda);
        const CholeskyFactor gram(gram_matrix);

        const std::vector<double> theta_hat = ridge_theta(view, samples, gram, sample_weights);
        const std::vector<double> nu_hat =
            empirical_nu(view, samples, gram, sample_weights, out.v.row(h + 1), rho);
        const std::vector<double> inv_diag = gram.inverse_diagonal();

        for (int i = 0; i < d; ++i)
            w_sum[static_cast<std::size_t>(i)] =
                theta_hat[static_cast<std::size_t>(i)] + nu_hat[static_cast<std::size_t>(i)];

        const double q_cap = static_cast<double>(H - h);
        double pen_min = std::numeric_limits<double>::infinity();
        double pen_max = 0.0;
        for (int s = 0; s < S; ++s) {
            double best_q = -1.0;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const auto f = view.features(s, a);
                double q_raw = 0.0;
                for (int i = 0; i < d; ++i)
                    q_raw += f[static_cast<std::size_t>(i)] * w_sum[static_cast<std::size_t>(i)];
                const double pen = penalty(f, inv_diag, gamma);
                const double q_clamped = std::clamp(q_raw - pen, 0.0, q_cap);
                const std::size_t idx = (static_cast<std::size_t>(h) * S + s) * A + a;
                out.q[idx] = q_clamped;
                out.penalty[idx] = pen;
                pen_min = std::min(pen_min, pen);
                pen_max = std::max(pen_max, pen);
                if (q_clamped > best_q) {
                    best_q = q_clamped;
                    best_a = a;
                }
            }
            out.policy.at(h, s) = best_a;
            out.v.at(h, s) = out.q_at(h, s, best_a);
        }

        auto& diag = out.steps[static_cast<std::size_t>(h)];
        diag.gram = std::move(gram_matrix);
        diag.theta_hat = theta_hat;
        diag.nu_hat = nu_hat;
        diag.penalty_min = pen_min;
        diag.penalty_max = pen_max;
        diag.sigma2_min = s2_min;
        diag.sigma2_max = s2_max;
        diag.n_samples = static_cast<long long>(n);
    }
    return out;
}

} // namespace detail

SolverOutput fit(const FeatureView& view, const OfflineDataset& data, const DropConfig& config) {
    return detail::pessimistic_lsvi(view, data, nullptr, config.resolved_lambda(),
                                    config.resolved_gamma(view.horizon, view.dim), config.rho);
}

} // namespace linrmdp
