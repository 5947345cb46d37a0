#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "beltrami/grid.hpp"
#include "beltrami/solver.hpp"

namespace beltrami {

// File-driven experiment description. Parsed from a plain key = value text
// format (schema = 1 required, '#' comments, unknown or duplicate keys
// rejected) so runs stay reproducible from a single small file.
struct ScenarioConfig {
  enum class Source { example1, file };

  // window
  cd center{0.0, 0.0};
  double halfwidth = 1.5;
  int resolution = 256;

  // coefficient source: the radial test family at a given alpha, or a CSV
  // pair on its own grid (which then overrides the window above)
  Source source = Source::example1;
  double alpha = 1.0;
  std::string coeff_path;

  std::vector<int> levels = {2, 3, 5, 9};
  SolveOptions solver;
  double p = 2.0;
  double gap_radius = 1.2;

  // analysis toggles, consumed by `diagnose`
  bool poletsky = false;
  bool equicontinuity = false;
  bool classifier = false;
  std::vector<double> far_field;  // radii for the decay profile, each within the
                                  // effective grid window; empty skips

  // classifier geometry (also used by the classify toggle)
  double domain_radius = 1.0;
  std::vector<cd> probes = {cd(0.0, 0.0)};

  // diagnose geometry: concentric disks for the equicontinuity pair and
  // annuli (r1, r2 pairs) for the modulus inequality
  double diag_inner = 0.6;
  double diag_outer = 1.0;
  int diag_pairs = 10000;
  std::vector<double> diag_annuli = {0.1, 0.3, 0.2, 0.5};

  // verify-oracle tolerances
  double verify_sup = 0.05;
  double verify_median = 0.01;
  double verify_inverse_abs = 1e-3;
  double verify_inverse_rel = 0.01;
  double verify_window = 1.2;

  unsigned long long seed = 0;
  std::string out_dir = "out";
};

// Throws parse_error (malformed lines, unknown keys, bad schema) with the
// 1-based line number filled in.
ScenarioConfig parse_config(std::istream& in);

// Reads and parses; io_error when the file cannot be opened.
ScenarioConfig load_config(const std::string& path);

// Semantic checks (ranges, monotone level lists); throws invalid_argument.
void validate_config(const ScenarioConfig& cfg);

// Subcommands. Each writes its artifacts under cfg.out_dir, logs one line per
// step to `log`, and returns a process exit code:
//   0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
// JSON reports are deterministic: fixed field order, floats rounded through
// json_round.
int cmd_solve(const ScenarioConfig& cfg, std::ostream& log);
int cmd_verify_oracle(const ScenarioConfig& cfg, std::ostream& log);
int cmd_classify(const ScenarioConfig& cfg, std::ostream& log);
int cmd_diagnose(const ScenarioConfig& cfg, std::ostream& log);

// Dispatch by subcommand name; unknown names return 2.
int run_command(const std::string& name, const ScenarioConfig& cfg, std::ostream& log);

}  // namespace beltrami
