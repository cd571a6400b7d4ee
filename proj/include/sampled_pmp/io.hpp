#ifndef SAMPLED_PMP_IO_HPP
#define SAMPLED_PMP_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sampled_pmp/builtins.hpp"
#include "sampled_pmp/certificate.hpp"
#include "sampled_pmp/parking.hpp"
#include "sampled_pmp/problem.hpp"
#include "sampled_pmp/simulate.hpp"

namespace sampled_pmp::io {

using Json = nlohmann::json;

/// A loaded problem file: the problem, its sampling period and, for
/// built-ins, the request it came from.
struct ProblemSpec {
  ProblemDefinition problem;
  double tf = 0.0;
  double T = 0.0;
  std::optional<Vector> adjoint_guess;
  std::optional<BuiltinRequest> builtin;
};

/// Parses either {"problem": <builtin>, "params": {...}, "tf", "T"} or an
/// inline definition (see docs/problem-spec.md). Unknown fields throw
/// InvalidArgument.
ProblemSpec parse_problem_spec(const Json& doc);
ProblemSpec load_problem_spec(const std::filesystem::path& path);

/// "%.12e", independent of the global locale.
std::string format_double(double value);
/// Like "%g", independent of the C locale.
std::string format_general(double value);
/// Strict decimal parse of a whole token (no locale, no trailing garbage).
std::optional<double> parse_double(std::string_view token);

void write_trajectory_csv(std::ostream& os, const Extremal& extremal);
void write_controls_csv(std::ostream& os, const Extremal& extremal,
                        const Certificate& certificate);

/// Controls read back from a controls CSV.
struct ControlsTable {
  std::vector<int> k;
  std::vector<double> t;
  std::vector<double> delta;
  ControlSequence u;
};

/// Throws InvalidArgument naming the offending row and column.
ControlsTable read_controls_csv(std::istream& is);

Json certificate_to_json(const Certificate& certificate);

void write_sweep_csv(std::ostream& os, const std::vector<parking::SweepRow>& rows);

/// FNV-1a 64-bit digest of a file, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace sampled_pmp::io

#endif  // SAMPLED_PMP_IO_HPP
