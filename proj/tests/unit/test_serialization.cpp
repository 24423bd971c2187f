#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "../support/bench_instance.hpp"
#include "linrmdp/drop_solver.hpp"
#include "linrmdp/robust_oracle.hpp"
#include "linrmdp/serialization.hpp"

using namespace linrmdp;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/linrmdp_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("instance JSON round-trips exactly") {
    const LinRmdpInstance inst = random_instance(91, 4, 3, 3, 5, 0.35);
    TempFile f("inst.json");
    save_instance(inst, f.path);
    const LinRmdpInstance back = load_instance(f.path);
    CHECK(back.num_states == inst.num_states);
    CHECK(back.phi == inst.phi);
    CHECK(back.theta == inst.theta);
    CHECK(back.mu0 == inst.mu0);
    CHECK(back.initial_dist == inst.initial_dist);
    CHECK(back.rho == inst.rho);
}

TEST_CASE("instance loader rejects invariant violations") {
    LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    inst.mu0[3] += 0.2; // break a measure row
    TempFile f("bad_inst.json");
    std::ofstream(f.path) << instance_to_json(inst);
    CHECK_THROWS_AS(load_instance(f.path), ValidationError);
}

TEST_CASE("instance loader rejects malformed documents") {
    TempFile f("not_json.json");
    std::ofstream(f.path) << "{ not json";
    CHECK_THROWS_AS(load_instance(f.path), ValidationError);

    TempFile g("missing_key.json");
    std::ofstream(g.path) << "{\"S\": 2}";
    CHECK_THROWS_AS(load_instance(g.path), ValidationError);
}

TEST_CASE("dataset JSONL round-trips") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const OfflineDataset data =
        generate(inst, uniform_policy(inst.horizon, inst.num_states, inst.num_actions), 25, 5);
    TempFile f("data.jsonl");
    save_dataset(data, f.path);
    const OfflineDataset back =
        load_dataset(f.path, inst.num_states, inst.num_actions, inst.horizon);
    CHECK(back.num_trajectories == data.num_trajectories);
    REQUIRE(back.steps.size() == data.steps.size());
    for (std::size_t h = 0; h < data.steps.size(); ++h) {
        REQUIRE(back.steps[h].size() == data.steps[h].size());
        for (std::size_t t = 0; t < data.steps[h].size(); ++t) {
            CHECK(back.steps[h][t].state == data.steps[h][t].state);
            CHECK(back.steps[h][t].reward == data.steps[h][t].reward);
            CHECK(back.steps[h][t].traj == data.steps[h][t].traj);
        }
    }
}

TEST_CASE("dataset loader validates index ranges") {
    TempFile f("bad_data.jsonl");
    std::ofstream(f.path)
        << R"({"h":0,"s":9,"a":0,"r":0.5,"s_next":0,"traj":0})" << "\n";
    CHECK_THROWS_AS(load_dataset(f.path, 3, 2, 4), ValidationError);
}

TEST_CASE("solver output JSON carries the documented keys") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const OfflineDataset data =
        generate(inst, uniform_policy(inst.horizon, inst.num_states, inst.num_actions), 60, 9);
    DropConfig cfg;
    cfg.rho = 0.2;
    cfg.num_trajectories = 60;
    cfg.gamma0 = 0.5;
    const SolverOutput out = fit(feature_view(inst), data, cfg);
    const std::string text = solver_output_to_json(out);
    for (const char* key :
         {"\"Q\"", "\"V\"", "\"pi\"", "\"gamma0\"", "\"lambda0\"", "\"per_step\"",
          "\"penalty_min\"", "\"penalty_max\"", "\"sigma2_min\"", "\"sigma2_max\""})
        CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("robust solution JSON carries the documented keys") {
    const LinRmdpInstance inst = testsupport::make_bench_instance(0.2);
    const RobustSolution sol = robust_value_iteration(inst);
    const std::string text =
        robust_solution_to_json(sol, inst.rho, inst.num_states, inst.num_actions);
    for (const char* key : {"\"V_star\"", "\"Q_star\"", "\"pi_star\"", "\"rho\""})
        CHECK(text.find(key) != std::string::npos);
}
