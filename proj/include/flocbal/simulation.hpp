#pragma once

#include <iosfwd>
#include <string>

#include "flocbal/config.hpp"
#include "flocbal/discrete.hpp"

namespace flocbal {

struct RunOptions {
  std::string out_dir;
  std::string config_path;  // echoed into report.txt; may be empty
  bool check_conservation = false;
  int quad_order = 4;
  TableMode table_mode = TableMode::corrected;
};

// Executes the configured scenario and writes series.csv, dist_<t>.csv
// snapshots and report.txt into opt.out_dir. Returns the process exit code:
//   0  success
//   2  config error (schema violations, unreadable inputs, unwritable output)
//   3  numerical failure (positivity loss, sub-step exhaustion, mass-budget
//      drift beyond output.budget_tol, failed conservation check)
// Human-readable diagnostics go to `err`.
int run_scenario(const ConfigMap& cfg, const RunOptions& opt, std::ostream& err);

}  // namespace flocbal
