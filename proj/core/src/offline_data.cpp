#include "linrmdp/offline_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "linrmdp/rng.hpp"

namespace linrmdp {

OfflineDataset generate(const LinRmdpInstance& instance, const StochasticPolicy& behavior, int K,
                        std::uint64_t seed) {
    if (behavior.horizon != instance.horizon || behavior.num_states != instance.num_states ||
        behavior.num_actions != instance.num_actions)
        throw std::invalid_argument("generate: behavior policy shape mismatch");
    if (K < 0) throw std::invalid_argument("generate: K must be nonnegative");

    const Kernel kernel = nominal_kernel(instance);

    OfflineDataset data;
    data.num_trajectories = K;
    data.horizon = instance.horizon;
    data.steps.assign(static_cast<std::size_t>(instance.horizon), {});
    for (auto& step : data.steps) step.reserve(static_cast<std::size_t>(K));

    Rng rng(derive_seed(seed, 0, seed_tag::data_gen));
    for (int k = 0; k < K; ++k) {
        int s = rng.categorical(instance.initial_dist);
        for (int h = 0; h < instance.horizon; ++h) {
            const int a = rng.categorical(behavior.row(h, s));
            const double r = instance.reward(h, s, a);
            const int sp = rng.categorical(kernel.row(h, s, a));
            data.steps[static_cast<std::size_t>(h)].push_back({s, a, r, sp, k});
            s = sp;
        }
    }
    return data;
}

int trim_count(int n_aux, int K, int H, double delta, int factor) {
    if (n_aux < 0) throw std::invalid_argument("trim_count: n_aux must be nonnegative");
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("trim_count: delta must lie in (0,1)");
    if (n_aux == 0) return 0;
    const double log_term = std::log(static_cast<double>(K) * H / delta);
    const double trimmed = n_aux - factor * std::sqrt(n_aux * log_term);
    return trimmed <= 0.0 ? 0 : static_cast<int>(std::floor(trimmed));
}

namespace {

std::vector<std::vector<int>> count_by_state(const OfflineDataset& data, int num_states,
                                             int traj_begin, int traj_end) {
    std::vector<std::vector<int>> counts(data.steps.size(),
                                         std::vector<int>(static_cast<std::size_t>(num_states), 0));
    for (std::size_t h = 0; h < data.steps.size(); ++h)
        for (const auto& t : data.steps[h])
            if (t.traj >= traj_begin && t.traj < traj_end)
                ++counts[h][static_cast<std::size_t>(t.state)];
    return counts;
}

std::vector<std::vector<int>> trim_table(const std::vector<std::vector<int>>& aux, int K, int H,
                                         double delta, int factor) {
    std::vector<std::vector<int>> trim(aux.size());
    for (std::size_t h = 0; h < aux.size(); ++h) {
        trim[h].resize(aux[h].size());
        for (std::size_t s = 0; s < aux[h].size(); ++s)
            trim[h][s] = trim_count(aux[h][s], K, H, delta, factor);
    }
    return trim;
}

/// Uniform without-replacement pick of min(trim, available) tuples per (h,s)
/// from the trajectory range [traj_begin, traj_end). Selected tuples keep
/// their original order within each step.
OfflineDataset pick_subsample(const OfflineDataset& data, int num_states,
                              const std::vector<std::vector<int>>& trim, int traj_begin,
                              int traj_end, std::uint64_t seed, std::uint64_t tag) {
    OfflineDataset out;
    out.num_trajectories = data.num_trajectories;
    out.horizon = data.horizon;
    out.steps.assign(data.steps.size(), {});

    std::vector<std::vector<std::size_t>> eligible(static_cast<std::size_t>(num_states));
    for (std::size_t h = 0; h < data.steps.size(); ++h) {
        for (auto& bucket : eligible) bucket.clear();
        const auto& step = data.steps[h];
        for (std::size_t idx = 0; idx < step.size(); ++idx)
            if (step[idx].traj >= traj_begin && step[idx].traj < traj_end)
                eligible[static_cast<std::size_t>(step[idx].state)].push_back(idx);

        for (int s = 0; s < num_states; ++s) {
            auto& bucket = eligible[static_cast<std::size_t>(s)];
            const std::size_t want =
                std::min<std::size_t>(bucket.size(),
                                      static_cast<std::size_t>(std::max(trim[h][static_cast<std::size_t>(s)], 0)));
            if (want == 0) continue;
            if (want < bucket.size()) {
                const std::uint64_t key = (static_cast<std::uint64_t>(h) << 32) |
                                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(s));
                Rng rng(derive_seed(seed, key, tag));
                rng.shuffle(bucket);
                bucket.resize(want);
                std::sort(bucket.begin(), bucket.end());
            }
            for (std::size_t idx : bucket) out.steps[h].push_back(step[idx]);
        }
    }
    return out;
}

void check_states_in_range(const OfflineDataset& data, int num_states) {
    for (const auto& step : data.steps)
        for (const auto& t : step)
            if (t.state < 0 || t.state >= num_states)
                throw std::out_of_range("subsample: state index out of range");
}

} // namespace

SplitCounts two_fold_counts(const OfflineDataset& data, int num_states, double delta) {
    const int K = data.num_trajectories;
    const int boundary = K / 2; // main half first, aux half second
    SplitCounts counts;
    counts.main = count_by_state(data, num_states, 0, boundary);
    counts.aux = count_by_state(data, num_states, boundary, K);
    counts.trim = trim_table(counts.aux, K, data.horizon, delta, 10);
    return counts;
}

SplitCounts three_fold_counts(const OfflineDataset& data, int num_states, double delta) {
    const int K = data.num_trajectories;
    const int third = K / 3; // thirds in order: aux, main, var
    SplitCounts counts;
    counts.aux = count_by_state(data, num_states, 0, third);
    counts.main = count_by_state(data, num_states, third, 2 * third);
    counts.var = count_by_state(data, num_states, 2 * third, K);
    counts.trim = trim_table(counts.aux, K, data.horizon, delta, 6);
    return counts;
}

OfflineDataset two_fold_subsample(const OfflineDataset& data, int num_states,
                                  const SubsampleConfig& config) {
    if (data.num_trajectories < 2)
        throw std::invalid_argument("two_fold_subsample: need at least 2 trajectories");
    check_states_in_range(data, num_states);
    const SplitCounts counts = two_fold_counts(data, num_states, config.delta);
    return pick_subsample(data, num_states, counts.trim, 0, data.num_trajectories / 2, config.seed,
                          seed_tag::subsample_main);
}

std::pair<OfflineDataset, OfflineDataset> three_fold_subsample(const OfflineDataset& data,
                                                               int num_states,
                                                               const SubsampleConfig& config) {
    if (data.num_trajectories < 3)
        throw std::invalid_argument("three_fold_subsample: need at least 3 trajectories");
    check_states_in_range(data, num_states);
    const SplitCounts counts = three_fold_counts(data, num_states, config.delta);
    const int third = data.num_trajectories / 3;
    OfflineDataset main_sub = pick_subsample(data, num_states, counts.trim, third, 2 * third,
                                             config.seed, seed_tag::subsample_main);
    OfflineDataset var_sub = pick_subsample(data, num_states, counts.trim, 2 * third,
                                            data.num_trajectories, config.seed,
                                            seed_tag::subsample_var);
    return {std::move(main_sub), std::move(var_sub)};
}

} // namespace linrmdp
