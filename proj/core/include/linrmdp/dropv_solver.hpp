#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "linrmdp/drop_solver.hpp"
#include "linrmdp/instance.hpp"
#include "linrmdp/numerics.hpp"
#include "linrmdp/offline_data.hpp"
#include "linrmdp/robust_oracle.hpp"

namespace linrmdp {

/// Conditional-variance estimate sigma2(h,s,a) in [1, H^2], with the ridge
/// intermediates it was built from.
struct VarianceEstimate {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> sigma2; // H x S x A
    std::vector<std::vector<double>> nu1; // per h, d
    std::vector<std::vector<double>> nu2; // per h, d
    std::vector<PsdMatrix> gram;          // per h, from the variance dataset

    double at(int h, int s, int a) const {
        return sigma2[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

/// Parameters of the variance-weighted fit. Unset lambda/gamma fall back to
/// lambda1 = 1/H^2 and gamma1 = 66 log(3HK/delta) sqrt(d).
struct DropVConfig {
    double rho = 0.0;
    double delta = 0.1;
    long long num_trajectories = 0; // K
    std::optional<double> lambda1;
    std::optional<double> gamma1;

    double resolved_lambda(int horizon) const {
        return lambda1.value_or(1.0 / (static_cast<double>(horizon) * horizon));
    }
    double resolved_gamma(int horizon, int dim) const;
};

/// sigma2(s,a) = max{ clamp(phi^T nu1, 0, H^2) - clamp(phi^T nu2, 0, H)^2, 1 }
/// per step, with nu1/nu2 ridge regressions of V^2 and V on the variance
/// dataset (unit regularizer).
VarianceEstimate estimate_variance(const FeatureView& view, const OfflineDataset& var_data,
                                   const ValueTable& v_tilde);

/// Variance-weighted pessimistic fit: Gram weights 1/sigma2, regularizer
/// lambda1, penalty gamma1 * sum_i phi_i sqrt((Sigma_h^{-1})_{ii}).
SolverOutput fit_weighted(const FeatureView& view, const OfflineDataset& data,
                          const VarianceEstimate& variance, const DropVConfig& config);

/// Full pipeline: three-fold subsampling, preliminary unweighted fit on the
/// variance split, variance estimation, then the weighted fit on the main
/// split. Deterministic given the subsample seed.
SolverOutput run_pipeline(const FeatureView& view, const OfflineDataset& data,
                          const DropVConfig& config, std::uint64_t subsample_seed,
                          double subsample_delta);

/// Diagnostic covariance Sigma*_h = sum_t phi phi^T / max{1, Var_{P0}[V*_{h+1}]}
/// + I/H^2, with the conditional variance computed from the nominal kernel.
std::vector<PsdMatrix> variance_weighted_covariance_star(const LinRmdpInstance& instance,
                                                         const OfflineDataset& data,
                                                         const ValueTable& v_star);

} // namespace linrmdp
