#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "linrmdp/rng.hpp"
#include "linrmdp/tv_dual.hpp"

using namespace linrmdp;

TEST_CASE("clip_value") {
    CHECK(clip_value(std::vector<double>{0.2, 0.9}, 0.5) == std::vector<double>{0.2, 0.5});
    CHECK(clip_value(std::vector<double>{0.2, 0.9}, 1.0) == std::vector<double>{0.2, 0.9});
    CHECK(clip_value(std::vector<double>{0.2, 0.9}, 0.1) == std::vector<double>{0.1, 0.1});
}

TEST_CASE("dual_objective") {
    DualProblem p;
    p.weights = {0.5, 0.5};
    p.values = {0.0, 1.0};
    p.rho = 0.3;
    p.floor = 0.0;
    p.lo = 0.0;
    p.hi = 1.0;
    CHECK(dual_objective(p, 1.0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(dual_objective(p, 1.5), std::invalid_argument);

    p.rho = 0.0;
    CHECK(dual_objective(p, p.hi) == doctest::Approx(0.5)); // w^T v

    DualProblem signed_p;
    signed_p.weights = {1.0, -0.5};
    signed_p.values = {0.0, 1.0};
    signed_p.rho = 0.0;
    signed_p.floor = 0.0;
    signed_p.lo = 0.0;
    signed_p.hi = 1.0;
    CHECK(dual_objective(signed_p, 0.5) == doctest::Approx(-0.25));
}

TEST_CASE("maximize_dual on the worked examples") {
    DualProblem p;
    p.weights = {0.5, 0.5};
    p.values = {0.0, 1.0};
    p.rho = 0.3;
    p.floor = 0.0;
    p.lo = 0.0;
    p.hi = 1.0;
    const DualMaximum m = maximize_dual(p);
    CHECK(m.alpha == doctest::Approx(1.0));
    CHECK(m.value == doctest::Approx(0.2));

    // signed weights force the lower endpoint
    DualProblem q;
    q.weights = {1.0, -0.5};
    q.values = {0.0, 1.0};
    q.rho = 0.0;
    q.floor = 0.0;
    q.lo = 0.0;
    q.hi = 1.0;
    const DualMaximum mq = maximize_dual(q);
    CHECK(mq.alpha == 0.0);
    CHECK(mq.value == doctest::Approx(0.0));

    // rho = 0 with nonnegative weights: value is the plain expectation
    DualProblem r;
    r.weights = {0.3, 0.7};
    r.values = {0.2, 0.8};
    r.rho = 0.0;
    r.floor = 0.2;
    r.lo = 0.2;
    r.hi = 0.8;
    const DualMaximum mr = maximize_dual(r);
    CHECK(mr.value == doctest::Approx(0.3 * 0.2 + 0.7 * 0.8));
    CHECK(mr.alpha == doctest::Approx(0.8));
}

TEST_CASE("maximize_dual degenerate cases") {
    // empty weights: value -rho*(lo - m) at the lower endpoint
    DualProblem p;
    p.rho = 0.4;
    p.floor = 0.0;
    p.lo = 0.25;
    p.hi = 1.0;
    const DualMaximum m = maximize_dual(p);
    CHECK(m.alpha == 0.25);
    CHECK(m.value == doctest::Approx(-0.4 * 0.25));

    // collapsed interval evaluates the single point
    DualProblem c;
    c.weights = {0.5, 0.25};
    c.values = {0.7, 0.7};
    c.rho = 0.9;
    c.floor = 0.7;
    c.lo = 0.7;
    c.hi = 0.7;
    const DualMaximum mc = maximize_dual(c);
    CHECK(mc.alpha == 0.7);
    CHECK(mc.value == doctest::Approx(0.75 * 0.7));
}

TEST_CASE("maximize_dual matches a dense grid on signed problems") {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 1 + static_cast<int>(rng.next_below(12));
        DualProblem p;
        p.values.resize(n);
        p.weights.resize(n);
        for (int j = 0; j < n; ++j) {
            p.values[j] = 4.0 * rng.u01();
            p.weights[j] = 2.0 * rng.u01() - 1.0;
        }
        p.lo = 0.0;
        p.hi = 4.0;
        p.floor = 0.0;
        p.rho = rng.u01();
        const DualMaximum exact = maximize_dual(p);
        const DualMaximum grid = testsupport::grid_maximize_dual(p);
        CHECK(exact.value >= grid.value - 1e-12); // exact dominates any grid point
        CHECK(std::abs(exact.value - grid.value) <= 1e-4 * (1.0 + std::abs(exact.value)));
    }
}

TEST_CASE("population_inner worked examples") {
    const std::vector<double> half = {0.5, 0.5};
    const std::vector<double> v01 = {0.0, 1.0};
    CHECK(population_inner(half, v01, 0.0) == doctest::Approx(0.5));
    CHECK(population_inner(half, v01, 0.5) == doctest::Approx(0.0));

    const std::vector<double> mu = {0.2, 0.8};
    const std::vector<double> v35 = {3.0, 5.0};
    CHECK(population_inner(mu, v35, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("brute_force_inner and worst_case_measure") {
    const std::vector<double> mu = {0.5, 0.5};
    const std::vector<double> v = {0.0, 1.0};
    CHECK(brute_force_inner(mu, v, 0.3) == doctest::Approx(0.2));
    const auto worst = worst_case_measure(mu, v, 0.3);
    CHECK(worst[0] == doctest::Approx(0.8));
    CHECK(worst[1] == doctest::Approx(0.2));

    CHECK(brute_force_inner(mu, v, 0.0) == doctest::Approx(0.5));
    CHECK(worst_case_measure(mu, v, 0.0) == mu);

    const std::vector<double> one = {1.0};
    CHECK(brute_force_inner(one, std::vector<double>{0.37}, 0.9) == doctest::Approx(0.37));

    // full ball with increasing values piles everything on state 0
    const std::vector<double> mu3 = {0.2, 0.5, 0.3};
    const std::vector<double> inc = {0.1, 0.2, 0.3};
    const auto point = worst_case_measure(mu3, inc, 1.0);
    CHECK(point[0] == doctest::Approx(1.0));
    CHECK(point[1] == doctest::Approx(0.0));
    CHECK(point[2] == doctest::Approx(0.0));
}

TEST_CASE("duality: dual max equals greedy transport on random problems") {
    Rng rng(47);
    std::vector<double> mu, v;
    for (int rep = 0; rep < 300; ++rep) {
        const int n = 2 + static_cast<int>(rng.next_below(7)); // S <= 8
        mu.resize(n);
        v.resize(n);
        rng.simplex(mu);
        const double h_scale = 1.0 + rng.next_below(6);
        for (double& x : v) x = h_scale * rng.u01();
        const double rho = rng.u01();

        const double dual = population_inner(mu, v, rho);
        const double primal = brute_force_inner(mu, v, rho);
        CHECK(std::abs(dual - primal) <= 1e-9);

        // sanity bounds
        double mu_dot_v = 0.0, v_min = v[0];
        for (int j = 0; j < n; ++j) {
            mu_dot_v += mu[j] * v[j];
            v_min = std::min(v_min, v[j]);
        }
        CHECK(dual <= mu_dot_v + 1e-12);
        CHECK(dual >= v_min - 1e-12);

        // the worst-case measure stays in the simplex and the TV ball
        const auto worst = worst_case_measure(mu, v, rho);
        double sum = 0.0, l1 = 0.0;
        for (int j = 0; j < n; ++j) {
            CHECK(worst[j] >= -1e-15);
            sum += worst[j];
            l1 += std::abs(worst[j] - mu[j]);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(0.5 * l1 <= rho + 1e-12);
    }
}

TEST_CASE("population_inner is nonincreasing in rho") {
    Rng rng(53);
    std::vector<double> mu(6), v(6);
    for (int rep = 0; rep < 50; ++rep) {
        rng.simplex(mu);
        for (double& x : v) x = 3.0 * rng.u01();
        double prev = population_inner(mu, v, 0.0);
        for (double rho = 0.1; rho <= 1.0 + 1e-12; rho += 0.1) {
            const double cur = population_inner(mu, v, rho);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}
