#pragma once

#include <string>
#include <vector>

#include "linrmdp/drop_solver.hpp"
#include "linrmdp/instance.hpp"
#include "linrmdp/offline_data.hpp"
#include "linrmdp/robust_oracle.hpp"

namespace linrmdp {

// Instance file format: one JSON document with keys
//   {S, A, H, d, rho, zeta, phi, theta, mu0}
// phi is S x A x d, theta is H x d, mu0 is H x d x S, all nested row-major
// arrays of decimal numbers. Loading validates and rejects on any violation.

std::string instance_to_json(const LinRmdpInstance& instance);
LinRmdpInstance instance_from_json(const std::string& text);
void save_instance(const LinRmdpInstance& instance, const std::string& path);
LinRmdpInstance load_instance(const std::string& path);

// Dataset file format: JSON lines, one record per tuple
//   {"h":., "s":., "a":., "r":., "s_next":., "traj":.}
// Loading validates index ranges against the given dimensions and infers K
// as 1 + max trajectory index.

void save_dataset(const OfflineDataset& data, const std::string& path);
OfflineDataset load_dataset(const std::string& path, int num_states, int num_actions,
                            int horizon);

/// {Q, V, pi, gamma0, lambda0, per_step: [{penalty_min, penalty_max,
/// sigma2_min, sigma2_max}]}; the sigma2 bounds are 1 for the unweighted fit.
std::string solver_output_to_json(const SolverOutput& output);
void save_solver_output(const SolverOutput& output, const std::string& path);

/// {V_star, Q_star, pi_star, rho}.
std::string robust_solution_to_json(const RobustSolution& solution, double rho, int num_states,
                                    int num_actions);
void save_robust_solution(const RobustSolution& solution, double rho, int num_states,
                          int num_actions, const std::string& path);

} // namespace linrmdp
