#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/bench_instance.hpp"
#include "linrmdp/dropv_solver.hpp"
#include "linrmdp/robust_oracle.hpp"

using namespace linrmdp;

namespace {

OfflineDataset make_dataset(const LinRmdpInstance& inst, int K, std::uint64_t seed) {
    return generate(inst, uniform_policy(inst.horizon, inst.num_states, inst.num_actions), K,
                    seed);
}

} // namespace

TEST_CASE("estimate_variance") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const FeatureView view = feature_view(inst);

    SUBCASE("zero values floor the variance at one") {
        const OfflineDataset data = make_dataset(inst, 50, 3);
        const ValueTable zeros = ValueTable::zeros(inst.horizon, inst.num_states);
        const VarianceEstimate est = estimate_variance(view, data, zeros);
        for (double s2 : est.sigma2) CHECK(s2 == 1.0);
    }
    SUBCASE("single tabular sample reproduces the scalar ridge arithmetic") {
        OfflineDataset data;
        data.horizon = inst.horizon;
        data.num_trajectories = 1;
        data.steps.assign(static_cast<std::size_t>(inst.horizon), {});
        data.steps[0].push_back({0, 0, 0.1, 1, 0});

        ValueTable v = ValueTable::zeros(inst.horizon, inst.num_states);
        v.at(1, 1) = 2.0; // next-state value seen by the sample
        const VarianceEstimate est = estimate_variance(view, data, v);
        // ridge with one indicator sample: phi^T nu1 = 4/2 = 2, phi^T nu2 = 2/2 = 1
        CHECK(est.at(0, 0, 0) == doctest::Approx(1.0)); // max{2 - 1, 1}
        CHECK(est.at(0, 1, 1) == 1.0);                  // unseen pair stays at the floor
    }
    SUBCASE("estimates stay inside [1, H^2]") {
        const OfflineDataset data = make_dataset(inst, 600, 11);
        DropConfig cfg;
        cfg.rho = 0.2;
        cfg.num_trajectories = 600;
        cfg.gamma0 = 0.3;
        const SolverOutput prelim = fit(view, data, cfg);
        const VarianceEstimate est = estimate_variance(view, data, prelim.v);
        const double h2 = static_cast<double>(inst.horizon) * inst.horizon;
        for (double s2 : est.sigma2) {
            CHECK(s2 >= 1.0);
            CHECK(s2 <= h2);
        }
    }
}

TEST_CASE("unit variances reproduce the unweighted fit exactly") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const FeatureView view = feature_view(inst);
    const OfflineDataset data = make_dataset(inst, 500, 7);

    DropConfig base;
    base.rho = 0.2;
    base.num_trajectories = 500;
    base.lambda0 = 0.8;
    base.gamma0 = 0.6;
    const SolverOutput unweighted = fit(view, data, base);

    VarianceEstimate unit;
    unit.num_states = inst.num_states;
    unit.num_actions = inst.num_actions;
    unit.horizon = inst.horizon;
    unit.sigma2.assign(static_cast<std::size_t>(inst.horizon) * inst.num_states *
                           inst.num_actions,
                       1.0);
    DropVConfig weighted_cfg;
    weighted_cfg.rho = 0.2;
    weighted_cfg.num_trajectories = 500;
    weighted_cfg.lambda1 = 0.8;
    weighted_cfg.gamma1 = 0.6;
    const SolverOutput weighted = fit_weighted(view, data, unit, weighted_cfg);

    CHECK(weighted.q == unweighted.q); // bitwise: same arithmetic order
    CHECK(weighted.v.values == unweighted.v.values);
    CHECK(weighted.policy.actions == unweighted.policy.actions);
}

TEST_CASE("fit_weighted validates the variance range") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    VarianceEstimate bad;
    bad.num_states = inst.num_states;
    bad.num_actions = inst.num_actions;
    bad.horizon = inst.horizon;
    bad.sigma2.assign(static_cast<std::size_t>(inst.horizon) * inst.num_states * inst.num_actions,
                      0.5);
    const OfflineDataset data = make_dataset(inst, 10, 1);
    CHECK_THROWS_AS(fit_weighted(feature_view(inst), data, bad, DropVConfig{}),
                    std::invalid_argument);
}

TEST_CASE("pipeline determinism and output ranges") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const FeatureView view = feature_view(inst);
    const OfflineDataset data = make_dataset(inst, 9000, 13);

    DropVConfig cfg;
    cfg.rho = 0.2;
    cfg.delta = 0.1;
    cfg.num_trajectories = 9000;
    cfg.gamma1 = 0.5;
    const SolverOutput a = run_pipeline(view, data, cfg, 77, 0.1);
    const SolverOutput b = run_pipeline(view, data, cfg, 77, 0.1);
    CHECK(a.q == b.q);
    CHECK(a.policy.actions == b.policy.actions);
    CHECK(!a.warnings.empty()); // sqrt(6) < 4: outside the guaranteed regime

    for (int h = 0; h < inst.horizon; ++h)
        for (int s = 0; s < inst.num_states; ++s)
            for (int a2 = 0; a2 < inst.num_actions; ++a2) {
                CHECK(a.q_at(h, s, a2) >= 0.0);
                CHECK(a.q_at(h, s, a2) <= static_cast<double>(inst.horizon - h));
            }

    SUBCASE("empty main split keeps the estimate at zero") {
        const OfflineDataset tiny = make_dataset(inst, 3, 5);
        const SolverOutput out = run_pipeline(view, tiny, cfg, 1, 0.1);
        for (double q : out.q) CHECK(q == 0.0);
    }
}

TEST_CASE("weighted Gram dominates its regularizer") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const FeatureView view = feature_view(inst);
    const OfflineDataset data = make_dataset(inst, 400, 19);
    DropConfig prelim;
    prelim.rho = 0.2;
    prelim.num_trajectories = 400;
    prelim.gamma0 = 0.4;
    const SolverOutput tilde = fit(view, data, prelim);
    const VarianceEstimate est = estimate_variance(view, data, tilde.v);

    DropVConfig cfg;
    cfg.rho = 0.2;
    cfg.num_trajectories = 400;
    cfg.gamma1 = 0.4;
    const SolverOutput out = fit_weighted(view, data, est, cfg);
    const double lambda1 = cfg.resolved_lambda(inst.horizon);
    for (const auto& step : out.steps)
        CHECK(sym_eigen_extremes(step.gram).first >= lambda1 - 1e-12);
}

TEST_CASE("variance-weighted covariance diagnostic") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const OfflineDataset data = make_dataset(inst, 300, 23);
    const RobustSolution sol = robust_value_iteration(inst);

    SUBCASE("zero values reduce to the unweighted Gram plus I/H^2") {
        const ValueTable zeros = ValueTable::zeros(inst.horizon, inst.num_states);
        const auto sigma_star = variance_weighted_covariance_star(inst, data, zeros);
        for (int h = 0; h < inst.horizon; ++h) {
            PsdMatrix expect =
                PsdMatrix::identity(inst.dim, 1.0 / (inst.horizon * inst.horizon));
            for (const auto& t : data.steps[h]) expect.add_outer(inst.features(t.state, t.action), 1.0);
            for (int i = 0; i < inst.dim; ++i)
                for (int j = 0; j < inst.dim; ++j)
                    CHECK(sigma_star[h].at(i, j) == doctest::Approx(expect.at(i, j)));
        }
    }
    SUBCASE("deterministic kernels have unit weights") {
        // both actions swap the two states, at both steps
        const std::vector<double> p = {0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0,
                                       0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0};
        const std::vector<double> r = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
        const LinRmdpInstance chain = tabular_embed(2, 2, 2, p, r, 0.0, std::vector<double>{1.0, 0.0});
        const OfflineDataset d = make_dataset(chain, 40, 2);
        ValueTable v = ValueTable::zeros(2, 2);
        v.at(1, 0) = 0.5;
        v.at(1, 1) = 0.3;
        const auto sigma_star = variance_weighted_covariance_star(chain, d, v);
        for (int h = 0; h < 2; ++h) {
            PsdMatrix expect = PsdMatrix::identity(chain.dim, 0.25);
            for (const auto& t : d.steps[h]) expect.add_outer(chain.features(t.state, t.action), 1.0);
            for (int i = 0; i < chain.dim; ++i)
                CHECK(sigma_star[h].at(i, i) == doctest::Approx(expect.at(i, i)));
        }
    }
    SUBCASE("H^2 Lambda^{-1} dominates Sigma_star^{-1}") {
        const auto sigma_star = variance_weighted_covariance_star(inst, data, sol.v_star);
        const double h2 = static_cast<double>(inst.horizon) * inst.horizon;
        for (int h = 0; h < inst.horizon; ++h) {
            PsdMatrix lambda = PsdMatrix::identity(inst.dim, 1.0);
            for (const auto& t : data.steps[h]) lambda.add_outer(inst.features(t.state, t.action), 1.0);
            // difference of inverses via explicit solves
            PsdMatrix diff(inst.dim);
            for (int j = 0; j < inst.dim; ++j) {
                std::vector<double> e(inst.dim, 0.0);
                e[j] = 1.0;
                const auto li = psd_solve(lambda, e);
                const auto si = psd_solve(sigma_star[h], e);
                for (int i = 0; i < inst.dim; ++i) diff.at(i, j) = h2 * li[i] - si[i];
            }
            // symmetrize roundoff before the eigen check
            for (int i = 0; i < inst.dim; ++i)
                for (int j = i + 1; j < inst.dim; ++j) {
                    const double m = 0.5 * (diff.at(i, j) + diff.at(j, i));
                    diff.at(i, j) = diff.at(j, i) = m;
                }
            CHECK(sym_eigen_extremes(diff).first >= -1e-9);
        }
    }
}
