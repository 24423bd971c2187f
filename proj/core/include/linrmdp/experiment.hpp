#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linrmdp/instance.hpp"

namespace linrmdp {

enum class SolverKind { drop, drop_v };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

struct BehaviorSpec {
    enum class Kind { uniform, epsilon_greedy } kind = Kind::uniform;
    double epsilon = 0.1; // epsilon-greedy only; mixes around the robust-optimal policy
};

/// Declarative experiment grid. Parsed from JSON with exactly these keys;
/// unknown keys are errors.
struct ExperimentConfig {
    // exactly one of the two instance sources is set
    std::optional<std::string> instance_file;
    struct RandomInstanceSpec {
        std::uint64_t seed = 0;
        int num_states = 0, num_actions = 0, horizon = 0, dim = 0;
        double rho = 0.0;
    };
    std::optional<RandomInstanceSpec> random_instance_spec;

    SolverKind solver = SolverKind::drop;
    std::vector<double> rho_list;
    std::vector<int> k_list;
    std::vector<std::uint64_t> seed_list;
    double delta = 0.1;
    BehaviorSpec behavior;

    std::optional<double> lambda0, gamma0, lambda1, gamma1;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// One (seed, K, rho, solver) cell. Cell-level randomness derives from
/// derive_seed(seed, cell_key, tag) with cell_key = mix64(mix64(K) ^ bits(rho)),
/// so a record is reproducible by re-running its cell alone, in any grid.
struct ExperimentRecord {
    std::uint64_t seed = 0;
    int num_trajectories = 0; // K
    double rho = 0.0;
    SolverKind solver = SolverKind::drop;
    double subopt = 0.0;
    double gamma_used = 0.0;
    long long runtime_ms = 0;
    long long n_post_subsample = 0;
};

/// Runs every cell of the grid in deterministic order (seeds outer, then K,
/// then rho). The sub-optimality of each learned policy is measured against
/// the exact robust solution at the cell's radius.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config);

/// CSV with the exact header seed,K,rho,solver,subopt,gamma_used,runtime_ms,n_post.
std::string records_to_csv(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> records_from_csv(const std::string& text);
void save_records_csv(const std::vector<ExperimentRecord>& records, const std::string& path);
std::vector<ExperimentRecord> load_records_csv(const std::string& path);

/// Least-squares slope of log(median subopt) against log K. Requires at
/// least 3 distinct K values with at least 10 records each.
double sweep_slope(const std::vector<ExperimentRecord>& records);

/// Coverage diagnostics for a behavior policy on an instance: kappa plus the
/// clipped and unclipped concentrability lower bounds, both evaluated over
/// {nominal kernel, worst-case kernel of V*}.
struct DiagnosticsReport {
    double kappa = 0.0;
    double c_rob_lower_bound = 0.0;
    double c1_lower_bound = 0.0;
};

DiagnosticsReport diagnose(const LinRmdpInstance& instance, const StochasticPolicy& behavior);
std::string diagnostics_to_json(const DiagnosticsReport& report);

/// Log-log median-subopt-vs-K chart, one polyline per solver, written as a
/// self-contained SVG. Fails (and writes nothing) when the CSV has no data
/// rows.
void plot_csv(const std::string& csv_path, const std::string& out_path);

} // namespace linrmdp
