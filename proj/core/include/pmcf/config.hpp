#ifndef PMCF_CONFIG_HPP
#define PMCF_CONFIG_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pmcf/momentum.hpp"
#include "pmcf/solver.hpp"

namespace pmcf {

struct SolverConfig {
  int L = 31;
  NewtonSettings newton;
};

struct TaskConfig {
  std::vector<double> h;                          // explicit h values
  std::vector<double> r;                          // or radii, mapped through initial_radius
  double h_start = 0.0;                           // or a geometric sweep:
  int h_count = 0;                                //   h_start * h_ratio^k, k < h_count
  std::vector<std::pair<double, double>> kappa;   // continuation curve (h, tau) knots
  std::string output = ".";
  bool strict = false;          // condition-flag failures become fatal (exit 3)
  std::uint64_t seed = 0;       // seeds randomized verify checks; recorded in outputs
  MomentumForm momentum_form = MomentumForm::York;
};

struct RunConfig {
  int schema = 1;
  DataFamily family;
  SolverConfig solver;
  TaskConfig task;

  // h values for the task: task.h, else task.r through initial_radius.
  std::vector<double> resolve_h_list() const;
};

// Parses the sectioned key-value config document. Unknown keys are rejected;
// every failure names the offending key through ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

}  // namespace pmcf

#endif
