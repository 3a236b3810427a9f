#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsedae/problems.hpp"
#include "sparsedae/stepper.hpp"

namespace sparsedae {

/// Extra `# name=value` comment lines appended after the summary.
using ProbeValues = std::vector<std::pair<std::string, double>>;

/// Header `t,<names>`, one row per record at 17 significant digits, then
/// `# accepted=..., rejected=..., jac_updates=..., lu=..., status=...`.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const ProbeValues& probes = {});
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, const ProbeValues& probes = {});

struct CsvTrajectory {
  Trajectory trajectory;
  ProbeValues probes;
};

/// Inverse of write_trajectory_csv. Throws ParseError.
CsvTrajectory read_trajectory_csv(std::istream& in);
CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);

/// Plain-text system definition:
///
///     [params]     name = value
///     [odes]       name' = expr
///     [algebraic]  expr = 0
///     [init]       name = value
///
/// ODE variables take the order of [odes]; algebraic variables are the [init]
/// names that have no ODE, in [init] order. `#` starts a comment.
/// Throws ParseError with the offending line, or InvalidSystem.
Problem parse_problem(std::string_view text, std::string id = "file");
Problem load_problem(const std::filesystem::path& path);

}  // namespace sparsedae
