#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "linrmdp/instance.hpp"

namespace linrmdp {

/// One transition-reward sample; `traj` records which trajectory produced it.
struct Transition {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
    int traj = 0;
};

/// Offline batch data grouped by step. Raw datasets have exactly K tuples per
/// step; subsampled datasets keep the K of their source and have at most that
/// many tuples per step.
struct OfflineDataset {
    int num_trajectories = 0; // K of the originating raw dataset
    int horizon = 0;
    std::vector<std::vector<Transition>> steps; // steps[h]

    std::size_t total_samples() const {
        std::size_t n = 0;
        for (const auto& step : steps) n += step.size();
        return n;
    }
};

struct SubsampleConfig {
    double delta = 0.1;      // confidence in (0,1)
    std::uint64_t seed = 0;  // stream master for the subsampling shuffles
};

/// Rolls K trajectories of length H under the behavior policy and the nominal
/// kernel. Rewards are phi(s,a)^T theta_h; deterministic given the seed.
OfflineDataset generate(const LinRmdpInstance& instance, const StochasticPolicy& behavior, int K,
                        std::uint64_t seed);

/// High-probability lower bound on a per-state sample count:
/// max{ n_aux - factor * sqrt(n_aux * log(K*H/delta)), 0 }, floored to an
/// integer. `K` is the trajectory count of the full dataset; factor is 10 for
/// the two-fold split and 6 for the three-fold split.
int trim_count(int n_aux, int K, int H, double delta, int factor);

/// Per-(h,s) counts of the split halves/thirds and the trim bound. `var`
/// is empty for the two-fold split.
struct SplitCounts {
    std::vector<std::vector<int>> aux;  // [h][s]
    std::vector<std::vector<int>> main; // [h][s]
    std::vector<std::vector<int>> var;  // [h][s], three-fold only
    std::vector<std::vector<int>> trim; // [h][s]
};

SplitCounts two_fold_counts(const OfflineDataset& data, int num_states, double delta);
SplitCounts three_fold_counts(const OfflineDataset& data, int num_states, double delta);

/// Two-fold subsampling: splits trajectories into halves (main first, aux
/// second), trims per-(h,s) counts against the aux half with factor 10, and
/// subsamples the main half uniformly without replacement.
OfflineDataset two_fold_subsample(const OfflineDataset& data, int num_states,
                                  const SubsampleConfig& config);

/// Three-fold subsampling with factor 6: thirds are (aux, main, var) in
/// trajectory order; returns the trimmed main and var datasets, which share
/// no tuples. First element feeds the weighted fit, second the variance
/// estimate.
std::pair<OfflineDataset, OfflineDataset> three_fold_subsample(const OfflineDataset& data,
                                                               int num_states,
                                                               const SubsampleConfig& config);

} // namespace linrmdp
