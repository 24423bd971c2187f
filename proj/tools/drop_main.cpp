// drop: distributionally robust offline RL toolkit for finite linear MDPs.
//
// Subcommands: gen-instance, gen-data, fit, oracle, run, sweep, diag, plot.
// Exit codes: 0 success, 2 validation failure (bad flags, bad files, invalid
// models), 1 runtime error.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "linrmdp/drop_solver.hpp"
#include "linrmdp/dropv_solver.hpp"
#include "linrmdp/experiment.hpp"
#include "linrmdp/instance.hpp"
#include "linrmdp/offline_data.hpp"
#include "linrmdp/robust_oracle.hpp"
#include "linrmdp/serialization.hpp"

namespace {

using namespace linrmdp;

StochasticPolicy make_behavior(const LinRmdpInstance& inst, const std::string& kind,
                               double epsilon) {
    if (kind == "uniform")
        return uniform_policy(inst.horizon, inst.num_states, inst.num_actions);
    if (kind == "eps-greedy") {
        const RobustSolution sol = robust_value_iteration(inst);
        return epsilon_greedy(sol.pi_star, inst.num_actions, epsilon);
    }
    throw ValidationError("behavior must be uniform or eps-greedy");
}

LinRmdpInstance load_with_radius(const std::string& path, const std::optional<double>& rho) {
    LinRmdpInstance inst = load_instance(path);
    if (rho.has_value()) inst = with_radius(inst, *rho);
    return inst;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Distributionally robust offline RL for finite linear MDPs"};
    app.require_subcommand(1);

    // gen-instance
    auto* gen_instance = app.add_subcommand("gen-instance", "Generate a random instance file");
    std::uint64_t gi_seed = 0;
    int gi_s = 3, gi_a = 2, gi_h = 4, gi_d = 4;
    double gi_rho = 0.0;
    std::string gi_out;
    gen_instance->add_option("--seed", gi_seed, "Generator seed")->required();
    gen_instance->add_option("--S", gi_s, "Number of states")->required();
    gen_instance->add_option("--A", gi_a, "Number of actions")->required();
    gen_instance->add_option("--H", gi_h, "Horizon")->required();
    gen_instance->add_option("--d", gi_d, "Feature dimension")->required();
    gen_instance->add_option("--rho", gi_rho, "TV radius (default 0)");
    gen_instance->add_option("--out", gi_out, "Output instance JSON path")->required();

    // gen-data
    auto* gen_data = app.add_subcommand("gen-data", "Roll offline trajectories");
    std::string gd_instance, gd_out, gd_behavior = "uniform";
    int gd_k = 0;
    std::uint64_t gd_seed = 0;
    double gd_epsilon = 0.1;
    std::optional<double> gd_rho;
    gen_data->add_option("--instance", gd_instance, "Instance JSON path")->required();
    gen_data->add_option("--K", gd_k, "Number of trajectories")->required();
    gen_data->add_option("--seed", gd_seed, "Generator seed")->required();
    gen_data->add_option("--behavior", gd_behavior, "uniform | eps-greedy");
    gen_data->add_option("--epsilon", gd_epsilon, "Mixing weight for eps-greedy");
    gen_data->add_option("--rho", gd_rho, "Radius override for the eps-greedy base policy");
    gen_data->add_option("--out", gd_out, "Output dataset JSONL path")->required();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Subsample and fit a solver on a dataset");
    std::string ft_instance, ft_data, ft_solver = "drop", ft_out;
    std::optional<double> ft_rho;
    double ft_delta = 0.1;
    std::uint64_t ft_seed = 0;
    std::optional<double> ft_lambda0, ft_gamma0, ft_lambda1, ft_gamma1;
    fit_cmd->add_option("--instance", ft_instance, "Instance JSON path")->required();
    fit_cmd->add_option("--data", ft_data, "Dataset JSONL path")->required();
    fit_cmd->add_option("--solver", ft_solver, "drop | drop-v");
    fit_cmd->add_option("--rho", ft_rho, "Radius override");
    fit_cmd->add_option("--delta", ft_delta, "Confidence parameter (default 0.1)");
    fit_cmd->add_option("--seed", ft_seed, "Subsampling seed")->required();
    fit_cmd->add_option("--lambda0", ft_lambda0, "Ridge regularizer override (drop)");
    fit_cmd->add_option("--gamma0", ft_gamma0, "Penalty coefficient override (drop)");
    fit_cmd->add_option("--lambda1", ft_lambda1, "Ridge regularizer override (drop-v)");
    fit_cmd->add_option("--gamma1", ft_gamma1, "Penalty coefficient override (drop-v)");
    fit_cmd->add_option("--out", ft_out, "Output solver JSON path")->required();

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Exact robust solution of an instance");
    std::string or_instance, or_out;
    std::optional<double> or_rho;
    oracle_cmd->add_option("--instance", or_instance, "Instance JSON path")->required();
    oracle_cmd->add_option("--rho", or_rho, "Radius override");
    oracle_cmd->add_option("--out", or_out, "Output solution JSON path")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "Run an experiment grid from a config file");
    std::string rn_config, rn_out;
    run_cmd->add_option("--config", rn_config, "Experiment config JSON path")->required();
    run_cmd->add_option("--out", rn_out, "Output CSV path")->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Log-log scaling slope from a results CSV");
    std::string sw_csv;
    sweep_cmd->add_option("--csv", sw_csv, "Results CSV path")->required();

    // diag
    auto* diag_cmd = app.add_subcommand("diag", "Coverage diagnostics for a behavior policy");
    std::string dg_instance, dg_behavior = "uniform";
    double dg_epsilon = 0.1;
    std::optional<double> dg_rho;
    diag_cmd->add_option("--instance", dg_instance, "Instance JSON path")->required();
    diag_cmd->add_option("--behavior", dg_behavior, "uniform | eps-greedy");
    diag_cmd->add_option("--epsilon", dg_epsilon, "Mixing weight for eps-greedy");
    diag_cmd->add_option("--rho", dg_rho, "Radius override");

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "Render a results CSV as an SVG chart");
    std::string pl_csv, pl_out;
    plot_cmd->add_option("--csv", pl_csv, "Results CSV path")->required();
    plot_cmd->add_option("--out", pl_out, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (gen_instance->parsed()) {
        const LinRmdpInstance inst = random_instance(gi_seed, gi_s, gi_a, gi_h, gi_d, gi_rho);
        require_valid(inst);
        save_instance(inst, gi_out);
        std::cout << "wrote " << gi_out << "\n";
    } else if (gen_data->parsed()) {
        const LinRmdpInstance inst = load_with_radius(gd_instance, gd_rho);
        const StochasticPolicy behavior = make_behavior(inst, gd_behavior, gd_epsilon);
        const OfflineDataset data = generate(inst, behavior, gd_k, gd_seed);
        save_dataset(data, gd_out);
        std::cout << "wrote " << gd_out << " (" << data.total_samples() << " tuples)\n";
    } else if (fit_cmd->parsed()) {
        const LinRmdpInstance inst = load_with_radius(ft_instance, ft_rho);
        const OfflineDataset data =
            load_dataset(ft_data, inst.num_states, inst.num_actions, inst.horizon);
        const FeatureView view = feature_view(inst);
        SolverOutput out;
        if (solver_kind_from_string(ft_solver) == SolverKind::drop) {
            const OfflineDataset d0 =
                two_fold_subsample(data, inst.num_states, SubsampleConfig{ft_delta, ft_seed});
            DropConfig cfg;
            cfg.rho = inst.rho;
            cfg.delta = ft_delta;
            cfg.num_trajectories = data.num_trajectories;
            cfg.lambda0 = ft_lambda0;
            cfg.gamma0 = ft_gamma0;
            out = fit(view, d0, cfg);
        } else {
            DropVConfig cfg;
            cfg.rho = inst.rho;
            cfg.delta = ft_delta;
            cfg.num_trajectories = data.num_trajectories;
            cfg.lambda1 = ft_lambda1;
            cfg.gamma1 = ft_gamma1;
            out = run_pipeline(view, data, cfg, ft_seed, ft_delta);
        }
        for (const auto& warning : out.warnings) std::cerr << "warning: " << warning << "\n";
        save_solver_output(out, ft_out);
        std::cout << "wrote " << ft_out << " (gamma=" << out.gamma << ", n=" << out.n_samples
                  << ")\n";
    } else if (oracle_cmd->parsed()) {
        const LinRmdpInstance inst = load_with_radius(or_instance, or_rho);
        require_valid(inst);
        const RobustSolution sol = robust_value_iteration(inst);
        save_robust_solution(sol, inst.rho, inst.num_states, inst.num_actions, or_out);
        // sanity line: the oracle's own policy has zero gap by construction
        std::cout << "wrote " << or_out << " (subopt of pi_star = "
                  << suboptimality(inst, sol, sol.pi_star) << ")\n";
    } else if (run_cmd->parsed()) {
        const ExperimentConfig cfg = load_experiment_config(rn_config);
        const auto records = run_experiment(cfg);
        save_records_csv(records, rn_out);
        std::cout << "wrote " << rn_out << " (" << records.size() << " records)\n";
    } else if (sweep_cmd->parsed()) {
        const auto records = load_records_csv(sw_csv);
        std::map<std::string, std::vector<ExperimentRecord>> by_solver;
        for (const auto& r : records) by_solver[to_string(r.solver)].push_back(r);
        for (const auto& [name, recs] : by_solver)
            std::cout << name << " slope " << sweep_slope(recs) << "\n";
    } else if (diag_cmd->parsed()) {
        const LinRmdpInstance inst = load_with_radius(dg_instance, dg_rho);
        const StochasticPolicy behavior = make_behavior(inst, dg_behavior, dg_epsilon);
        std::cout << diagnostics_to_json(diagnose(inst, behavior));
    } else if (plot_cmd->parsed()) {
        plot_csv(pl_csv, pl_out);
        std::cout << "wrote " << pl_out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const linrmdp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        // invalid_argument is only thrown for rejected inputs
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
