#include "linrmdp/dropv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace linrmdp {

double DropVConfig::resolved_gamma(int horizon, int dim) const {
    if (gamma1.has_value()) return *gamma1;
    const double k = static_cast<double>(std::max<long long>(num_trajectories, 1));
    const double xi1 = 66.0 * std::log(3.0 * horizon * k / delta);
    return xi1 * std::sqrt(static_cast<double>(dim));
}

VarianceEstimate estimate_variance(const FeatureView& view, const OfflineDataset& var_data,
                                   const ValueTable& v_tilde) {
    const int S = view.num_states, A = view.num_actions, H = view.horizon, d = view.dim;
    if (v_tilde.horizon != H || v_tilde.num_states != S)
        throw std::invalid_argument("estimate_variance: value table shape mismatch");
    if (var_data.horizon != H)
        throw std::invalid_argument("estimate_variance: dataset horizon mismatch");

    const double h_cap = static_cast<double>(H);
    const double h2_cap = h_cap * h_cap;

    VarianceEstimate est;
    est.num_states = S;
    est.num_actions = A;
    est.horizon = H;
    est.sigma2.assign(static_cast<std::size_t>(H) * S * A, 1.0);
    est.nu1.resize(static_cast<std::size_t>(H));
    est.nu2.resize(static_cast<std::size_t>(H));
    est.gram.resize(static_cast<std::size_t>(H));

    for (int h = 0; h < H; ++h) {
        const auto& samples = var_data.steps[static_cast<std::size_t>(h)];
        std::vector<std::span<const double>> feats(samples.size());
        const std::vector<double> unit(samples.size(), 1.0);
        std::vector<double> rhs1(static_cast<std::size_t>(d), 0.0);
        std::vector<double> rhs2(static_cast<std::size_t>(d), 0.0);
        const auto v_next = v_tilde.row(h + 1);
        for (std::size_t t = 0; t < samples.size(); ++t) {
            const auto f = view.features(samples[t].state, samples[t].action);
            feats[t] = f;
            const double v = v_next[static_cast<std::size_t>(samples[t].next_state)];
            for (int i = 0; i < d; ++i) {
                rhs1[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)] * v * v;
                rhs2[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)] * v;
            }
        }
        PsdMatrix gram_matrix = gram_accumulate(d, feats, unit, 1.0);
        const CholeskyFactor gram(gram_matrix);
        est.nu1[static_cast<std::size_t>(h)] = gram.solve(rhs1);
        est.nu2[static_cast<std::size_t>(h)] = gram.solve(rhs2);
        est.gram[static_cast<std::size_t>(h)] = std::move(gram_matrix);

        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const auto f = view.features(s, a);
                double m1 = 0.0, m2 = 0.0;
                for (int i = 0; i < d; ++i) {
                    m1 += f[static_cast<std::size_t>(i)] *
                          est.nu1[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)];
                    m2 += f[static_cast<std::size_t>(i)] *
                          est.nu2[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)];
                }
                m1 = std::clamp(m1, 0.0, h2_cap);
                m2 = std::clamp(m2, 0.0, h_cap);
                est.sigma2[(static_cast<std::size_t>(h) * S + s) * A + a] =
                    std::max(m1 - m2 * m2, 1.0);
            }
    }
    return est;
}

SolverOutput fit_weighted(const FeatureView& view, const OfflineDataset& data,
                          const VarianceEstimate& variance, const DropVConfig& config) {
    const double h2 = static_cast<double>(view.horizon) * view.horizon;
    for (double s2 : variance.sigma2)
        if (s2 < 1.0 || s2 > h2 + kConstructionTol)
            throw std::invalid_argument("fit_weighted: sigma2 outside [1, H^2]");
    return detail::pessimistic_lsvi(view, data, &variance.sigma2,
                                    config.resolved_lambda(view.horizon),
                                    config.resolved_gamma(view.horizon, view.dim), config.rho);
}

SolverOutput run_pipeline(const FeatureView& view, const OfflineDataset& data,
                          const DropVConfig& config, std::uint64_t subsample_seed,
                          double subsample_delta) {
    auto [main_data, var_data] = three_fold_subsample(
        data, view.num_states, SubsampleConfig{subsample_delta, subsample_seed});

    DropConfig prelim;
    prelim.rho = config.rho;
    prelim.delta = config.delta;
    prelim.num_trajectories = config.num_trajectories;
    const SolverOutput tilde = fit(view, var_data, prelim);

    const VarianceEstimate variance = estimate_variance(view, var_data, tilde.v);
    SolverOutput out = fit_weighted(view, main_data, variance, config);
    if (std::sqrt(static_cast<double>(view.dim)) < view.horizon)
        out.warnings.push_back("sqrt(d) < H: the variance-weighted guarantee does not cover this "
                               "regime; results are still valid output");
    return out;
}

std::vector<PsdMatrix> variance_weighted_covariance_star(const LinRmdpInstance& instance,
                                                         const OfflineDataset& data,
                                                         const ValueTable& v_star) {
    const int S = instance.num_states, A = instance.num_actions, H = instance.horizon;
    if (v_star.horizon != H || v_star.num_states != S)
        throw std::invalid_argument("variance_weighted_covariance_star: shape mismatch");

    std::vector<PsdMatrix> out(static_cast<std::size_t>(H));
    const double inv_h2 = 1.0 / (static_cast<double>(H) * H);
    for (int h = 0; h < H; ++h) {
        // conditional variance of V*_{h+1} under the nominal kernel, per (s,a)
        std::vector<double> var(static_cast<std::size_t>(S) * A, 0.0);
        const auto v_next = v_star.row(h + 1);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const auto row = nominal_transition(instance, h, s, a);
                double m1 = 0.0, m2 = 0.0;
                for (int sp = 0; sp < S; ++sp) {
                    const double v = v_next[static_cast<std::size_t>(sp)];
                    m1 += row[static_cast<std::size_t>(sp)] * v * v;
                    m2 += row[static_cast<std::size_t>(sp)] * v;
                }
                var[static_cast<std::size_t>(s) * A + a] = m1 - m2 * m2;
            }

        PsdMatrix m = PsdMatrix::identity(instance.dim, inv_h2);
        for (const auto& t : data.steps[static_cast<std::size_t>(h)])
            m.add_outer(instance.features(t.state, t.action),
                        1.0 / std::max(1.0, var[static_cast<std::size_t>(t.state) * A + t.action]));
        out[static_cast<std::size_t>(h)] = std::move(m);
    }
    return out;
}

} // namespace linrmdp
