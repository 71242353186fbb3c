#pragma once

#include "hjb/problem.hpp"
#include "hjb/semigroup.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hjb {

/// Optional "scheme" block of a problem document; command-line options win.
struct SchemeDefaults {
  std::optional<double> theta;
  std::optional<int> nx;
  std::optional<double> dt;
  std::optional<double> cfl_factor;
  std::optional<std::string> stencil;
};

/// A problem document and the optional closed-form reference it declares.
struct LoadedProblem {
  HjbProblem problem;
  SchemeDefaults scheme;
  /// From "exact", or from the solution of a "manufactured" block.
  std::optional<SpaceTimeFn> exact;
};

/// Problem documents:
///   { "dim": 1, "period": 6.283185307179586 (or per-dimension array),
///     "horizon": 1.0,
///     "controls": [ {"label": "...", "sigma": ..., "b": ..., "c": ..., "f": ...}, ... ],
///     "u0": <expr>,
///     "exact": <expr>,                                   (optional)
///     "manufactured": {"solution": <expr>, "slack": [<expr> per control]} (optional),
///     "scheme": {"theta", "nx", "dt", "cfl_factor", "stencil"} (optional) }
/// <expr> is a number or {"name": "const"|"sin_sum"|"gauss_bump", "params": {...},
/// "part": "positive"|"negative"}. sigma is a number (times identity) or an
/// N x P array; b is a number (every component) or an N array. Throws
/// ConfigError on malformed input.
LoadedProblem parse_problem(const std::string& json_text);
LoadedProblem load_problem_file(const std::string& path);

/// {"modes": [[0], [1, 2]]}; entries are control indices or control labels.
std::vector<std::vector<std::size_t>> load_modes_file(const std::string& path,
                                                      const HjbProblem& problem);

/// { "dim", "period", "horizon", "u0": <expr>,
///   "families": [[{"a": number | N x N array, "f": number}, ...], [...]] }
SplitProblem parse_split_problem(const std::string& json_text);
SplitProblem load_split_file(const std::string& path);

/// {"matrix": [[...], ...]} or a bare array of rows.
Matrix parse_matrix(const std::string& json_text);
Matrix load_matrix_file(const std::string& path);

/// Reads a whole file; ConfigError "config: file not found: <path>" if absent.
std::string read_text_file(const std::string& path);

}  // namespace hjb
