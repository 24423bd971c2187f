#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/bench_instance.hpp"
#include "../support/oracles.hpp"
#include "linrmdp/robust_oracle.hpp"
#include "linrmdp/rng.hpp"

using namespace linrmdp;

namespace {

DeterministicPolicy random_policy(Rng& rng, int H, int S, int A) {
    DeterministicPolicy p;
    p.horizon = H;
    p.num_states = S;
    p.actions.resize(static_cast<std::size_t>(H) * S);
    for (int& a : p.actions) a = static_cast<int>(rng.next_below(A));
    return p;
}

} // namespace

TEST_CASE("horizon one reduces to the reward maximum for any radius") {
    const std::vector<double> p = {0.5, 0.5, 0.3, 0.7, 1.0, 0.0, 0.2, 0.8};
    const std::vector<double> r = {0.1, 0.6, 0.4, 0.3};
    const std::vector<double> zeta = {0.5, 0.5};
    for (double rho : {0.0, 0.3, 1.0}) {
        const LinRmdpInstance inst = tabular_embed(2, 2, 1, p, r, rho, zeta);
        const RobustSolution sol = robust_value_iteration(inst);
        CHECK(sol.v_star.at(0, 0) == doctest::Approx(0.6));
        CHECK(sol.v_star.at(0, 1) == doctest::Approx(0.4));
        CHECK(sol.pi_star.at(0, 0) == 1);
        CHECK(sol.pi_star.at(0, 1) == 0);
    }
}

TEST_CASE("zero radius matches plain value iteration on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng dims(seed + 100);
        const int S = 2 + static_cast<int>(dims.next_below(4));
        const int A = 2 + static_cast<int>(dims.next_below(4));
        const int H = 1 + static_cast<int>(dims.next_below(6));
        const int d = 1 + static_cast<int>(dims.next_below(10));
        const LinRmdpInstance inst = random_instance(seed, S, A, H, d, 0.0);
        const RobustSolution sol = robust_value_iteration(inst);
        const ValueTable plain = testsupport::plain_value_iteration(inst);
        for (int h = 0; h <= H; ++h)
            for (int s = 0; s < S; ++s)
                CHECK(sol.v_star.at(h, s) == doctest::Approx(plain.at(h, s)).epsilon(1e-10));
    }
}

TEST_CASE("dual recursion agrees with the greedy-transport recursion") {
    const LinRmdpInstance small = testsupport::make_bench_instance(0.3);
    const RobustSolution sol = robust_value_iteration(small);
    const ValueTable primal = testsupport::primal_robust_value_iteration(small);
    for (int h = 0; h <= small.horizon; ++h)
        for (int s = 0; s < small.num_states; ++s)
            CHECK(std::abs(sol.v_star.at(h, s) - primal.at(h, s)) <= 1e-9);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const LinRmdpInstance inst = random_instance(seed, 4, 3, 3, 5, 0.4);
        const RobustSolution s2 = robust_value_iteration(inst);
        const ValueTable p2 = testsupport::primal_robust_value_iteration(inst);
        for (int h = 0; h <= inst.horizon; ++h)
            for (int s = 0; s < inst.num_states; ++s)
                CHECK(std::abs(s2.v_star.at(h, s) - p2.at(h, s)) <= 1e-9);
    }
}

TEST_CASE("robust_policy_eval") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.25);
    const RobustSolution sol = robust_value_iteration(inst);

    SUBCASE("the optimal policy recovers the optimal value") {
        const ValueTable v = robust_policy_eval(inst, sol.pi_star);
        for (int h = 0; h <= inst.horizon; ++h)
            for (int s = 0; s < inst.num_states; ++s)
                CHECK(v.at(h, s) == doctest::Approx(sol.v_star.at(h, s)).epsilon(1e-10));
    }
    SUBCASE("every policy is dominated pointwise") {
        Rng rng(5);
        for (int rep = 0; rep < 20; ++rep) {
            const DeterministicPolicy pi =
                random_policy(rng, inst.horizon, inst.num_states, inst.num_actions);
            const ValueTable v = robust_policy_eval(inst, pi);
            for (int h = 0; h <= inst.horizon; ++h)
                for (int s = 0; s < inst.num_states; ++s)
                    CHECK(v.at(h, s) <= sol.v_star.at(h, s) + 1e-10);
        }
    }
    SUBCASE("values shrink as the radius grows") {
        Rng rng(6);
        const DeterministicPolicy pi =
            random_policy(rng, inst.horizon, inst.num_states, inst.num_actions);
        std::vector<double> prev(inst.num_states, 1e9);
        for (double rho = 0.0; rho <= 1.0 + 1e-12; rho += 0.2) {
            const ValueTable v = robust_policy_eval(with_radius(inst, rho), pi);
            for (int s = 0; s < inst.num_states; ++s) {
                CHECK(v.at(0, s) <= prev[s] + 1e-10);
                prev[s] = v.at(0, s);
            }
        }
    }
}

TEST_CASE("suboptimality") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const RobustSolution sol = robust_value_iteration(inst);
    CHECK(suboptimality(inst, sol, sol.pi_star) == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const DeterministicPolicy pi =
            random_policy(rng, inst.horizon, inst.num_states, inst.num_actions);
        CHECK(suboptimality(inst, sol, pi) >= -1e-10);
    }

    // uniform rewards with H = 1: every policy is optimal
    const std::vector<double> p = {1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.5, 0.5};
    const std::vector<double> r = {0.4, 0.4, 0.4, 0.4};
    const LinRmdpInstance flat = tabular_embed(2, 2, 1, p, r, 0.6, std::vector<double>{0.5, 0.5});
    Rng rng2(9);
    for (int rep = 0; rep < 8; ++rep) {
        const DeterministicPolicy pi = random_policy(rng2, 1, 2, 2);
        CHECK(suboptimality(flat, pi) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("worst_case_kernel") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.35);
    const RobustSolution sol = robust_value_iteration(inst);

    SUBCASE("zero radius returns the nominal kernel") {
        const LinRmdpInstance base = with_radius(inst, 0.0);
        const Kernel k = worst_case_kernel(base, robust_value_iteration(base).v_star);
        const Kernel nom = nominal_kernel(base);
        for (std::size_t i = 0; i < k.p.size(); ++i)
            CHECK(k.p[i] == doctest::Approx(nom.p[i]).epsilon(1e-12));
    }
    SUBCASE("rows are probability vectors") {
        const Kernel k = worst_case_kernel(inst, sol.v_star);
        for (int h = 0; h < inst.horizon; ++h)
            for (int s = 0; s < inst.num_states; ++s)
                for (int a = 0; a < inst.num_actions; ++a) {
                    double sum = 0.0;
                    for (double x : k.row(h, s, a)) {
                        CHECK(x >= -1e-12);
                        sum += x;
                    }
                    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
                }
    }
    SUBCASE("cross-evaluation certifies robust policy values") {
        Rng rng(10);
        for (int rep = 0; rep < 10; ++rep) {
            const DeterministicPolicy pi =
                random_policy(rng, inst.horizon, inst.num_states, inst.num_actions);
            const ValueTable v_rob = robust_policy_eval(inst, pi);
            const Kernel k = worst_case_kernel(inst, v_rob);
            const ValueTable v_plain = plain_policy_eval(inst, k, pi);
            for (int h = 0; h <= inst.horizon; ++h)
                for (int s = 0; s < inst.num_states; ++s)
                    CHECK(std::abs(v_plain.at(h, s) - v_rob.at(h, s)) <= 1e-9);
        }
    }
}

TEST_CASE("occupancy") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const StochasticPolicy uni = uniform_policy(inst.horizon, inst.num_states, inst.num_actions);
    const OccupancyTable occ = occupancy(inst, uni);

    SUBCASE("first step is the initial distribution times the policy") {
        for (int s = 0; s < inst.num_states; ++s)
            for (int a = 0; a < inst.num_actions; ++a)
                CHECK(occ.at(0, s, a) ==
                      doctest::Approx(inst.initial_dist[s] / inst.num_actions));
    }
    SUBCASE("rows sum to one at every step") {
        for (int h = 0; h < inst.horizon; ++h) {
            double sum = 0.0;
            for (int s = 0; s < inst.num_states; ++s)
                for (int a = 0; a < inst.num_actions; ++a) sum += occ.at(h, s, a);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    SUBCASE("a deterministic cycle is a point mass per step") {
        // two states, one action, deterministic swap
        const std::vector<double> p = {0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0};
        const std::vector<double> r = {0.0, 0.0, 0.0, 0.0};
        const LinRmdpInstance chain = tabular_embed(2, 1, 2, p, r, 0.0, std::vector<double>{1.0, 0.0});
        const OccupancyTable o = occupancy(chain, uniform_policy(2, 2, 1));
        CHECK(o.at(0, 0, 0) == doctest::Approx(1.0));
        CHECK(o.at(1, 1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("doubly uniform instance keeps the occupancy uniform") {
        const int S = 3, A = 2, H = 3;
        std::vector<double> p(static_cast<std::size_t>(H) * S * A * S, 1.0 / S);
        std::vector<double> r(static_cast<std::size_t>(H) * S * A, 0.5);
        const LinRmdpInstance u = tabular_embed(S, A, H, p, r, 0.0,
                                                std::vector<double>(S, 1.0 / S));
        const OccupancyTable o = occupancy(u, uniform_policy(H, S, A));
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    CHECK(o.at(h, s, a) == doctest::Approx(1.0 / (S * A)).epsilon(1e-12));
    }
}

TEST_CASE("kappa") {
    SUBCASE("uniform tabular gives 1/(SA)") {
        const int S = 3, A = 2, H = 3;
        std::vector<double> p(static_cast<std::size_t>(H) * S * A * S, 1.0 / S);
        std::vector<double> r(static_cast<std::size_t>(H) * S * A, 0.5);
        const LinRmdpInstance u = tabular_embed(S, A, H, p, r, 0.0,
                                                std::vector<double>(S, 1.0 / S));
        CHECK(kappa(u, uniform_policy(H, S, A)) == doctest::Approx(1.0 / (S * A)).epsilon(1e-10));
    }
    SUBCASE("an unexplored direction collapses kappa to zero") {
        const LinRmdpInstance inst = testsupport::make_bench_instance(0.0);
        DeterministicPolicy always0;
        always0.horizon = inst.horizon;
        always0.num_states = inst.num_states;
        always0.actions.assign(static_cast<std::size_t>(inst.horizon) * inst.num_states, 0);
        CHECK(kappa(inst, to_stochastic(always0, inst.num_actions)) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("kappa never exceeds 1/d") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const LinRmdpInstance inst = random_instance(seed, 4, 3, 3, 6, 0.1);
            const double k =
                kappa(inst, uniform_policy(inst.horizon, inst.num_states, inst.num_actions));
            CHECK(k <= 1.0 / inst.dim + 1e-9);
        }
    }
}

TEST_CASE("concentrability diagnostics") {
    SUBCASE("uniform two-state, one-action instance gives exactly 2") {
        const int S = 2, A = 1, H = 2;
        std::vector<double> p(static_cast<std::size_t>(H) * S * A * S, 0.5);
        std::vector<double> r(static_cast<std::size_t>(H) * S * A, 0.3);
        const LinRmdpInstance inst = tabular_embed(S, A, H, p, r, 0.0, std::vector<double>{0.5, 0.5});
        const RobustSolution sol = robust_value_iteration(inst);
        const std::vector<Kernel> kernels = {nominal_kernel(inst)};
        const StochasticPolicy behavior = uniform_policy(H, S, A);
        CHECK(clipped_concentrability(inst, behavior, sol.pi_star, kernels) ==
              doctest::Approx(2.0).epsilon(1e-10));
    }
    SUBCASE("fully concentrated occupancies give exactly 1") {
        // absorbing state 0, started from state 0
        const std::vector<double> p = {1.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.5, 0.5};
        const std::vector<double> r = {0.3, 0.3, 0.3, 0.3};
        const LinRmdpInstance inst = tabular_embed(2, 1, 2, p, r, 0.0, std::vector<double>{1.0, 0.0});
        const RobustSolution sol = robust_value_iteration(inst);
        const std::vector<Kernel> kernels = {nominal_kernel(inst)};
        CHECK(clipped_concentrability(inst, uniform_policy(2, 2, 1), sol.pi_star, kernels) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("clipped is at least 1 and at most d times unclipped") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const LinRmdpInstance inst = random_instance(seed, 4, 2, 3, 5, 0.3);
            const RobustSolution sol = robust_value_iteration(inst);
            const StochasticPolicy behavior =
                uniform_policy(inst.horizon, inst.num_states, inst.num_actions);
            std::vector<Kernel> kernels;
            kernels.push_back(nominal_kernel(inst));
            kernels.push_back(worst_case_kernel(inst, sol.v_star));
            const double c_rob = clipped_concentrability(inst, behavior, sol.pi_star, kernels);
            const double c1 = unclipped_concentrability(inst, behavior, sol.pi_star, kernels);
            CHECK(c_rob >= 1.0 - 1e-9);
            CHECK(c_rob <= inst.dim * c1 * (1.0 + 1e-12) + 1e-12);
        }
    }
}
