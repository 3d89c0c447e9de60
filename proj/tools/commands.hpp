#pragma once

// Subcommands of the wsrctrl tool. Each command computes everything in
// memory and returns the CSV files it wants written; nothing touches the
// output directory until the whole run has succeeded.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "wsrctrl/matops.hpp"

namespace wsrctrl::app {

struct Artifact {
  std::string name;
  std::string content;
};
using Artifacts = std::vector<Artifact>;

// Progress messages go to `os` when verbosity > 0.
class Log {
 public:
  Log(std::ostream* os = nullptr, int verbosity = 0) : os_(os), verbosity_(verbosity) {}
  template <typename... Ts>
  void info(const Ts&... parts) const {
    if (os_ && verbosity_ > 0) ((*os_ << parts), ...) << '\n';
  }

 private:
  std::ostream* os_;
  int verbosity_;
};

Artifacts cmd_design(const RunConfig& cfg, const Log& log = {});
Artifacts cmd_sweep(const RunConfig& cfg, const Log& log = {});
Artifacts cmd_stability(const RunConfig& cfg, const Log& log = {});
Artifacts cmd_simulate(const RunConfig& cfg, const Log& log = {});
Artifacts cmd_robustness(const RunConfig& cfg, const Log& log = {});

// Contents of a solution.csv written by cmd_design.
struct SolutionFile {
  std::optional<SymMat> P;
  Mat L;
  std::optional<double> theta;
  std::string config_fingerprint;
};
SolutionFile read_solution_csv(const std::filesystem::path& path, Index n, Index m);

// Creates `dir` if needed and writes every artifact. Throws IoError.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);

// Full command line: parses flags, runs the subcommand, writes outputs.
// Returns 0 on success, 1 for configuration errors, 2 for numerical errors
// and 3 for I/O errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsrctrl::app
