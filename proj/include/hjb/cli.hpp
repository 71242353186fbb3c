#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hjb::cli {

enum class Command { solve, rates, switching, split, pcc, decompose, probe };

/// Parsed command line. Zero (or a negative exponent) means "choose automatically".
struct RunConfig {
  Command command = Command::solve;
  std::string config_path;
  std::string modes_path;
  std::string out_path;
  /// Unset values fall back to the problem's "scheme" block, then to
  /// per-command defaults.
  std::optional<double> theta;
  std::optional<std::string> stencil;
  std::optional<int> nx;
  std::optional<double> dt;
  std::optional<double> cfl_factor;
  double dt_factor = 0.0;
  double dt_power = 1.0;
  int stride = 1;
  bool force = false;
  bool max_over_time = false;
  std::vector<int> levels;
  int reference_nx = 0;
  double exponent = -1.0;
  std::vector<double> k_list;
  std::vector<double> dt_list;
  int reference_ratio = 16;
  int max_order = 2;
  int trials = 1000;
  std::uint64_t seed = 0;
};

/// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_numerical = 2;
inline constexpr int exit_failure = 3;

/// Runs one subcommand. Results go to `out` and to files; a failure prints
/// one line "<kind>: <reason>" to `err`.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and executes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hjb::cli
