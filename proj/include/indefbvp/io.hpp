#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "indefbvp/continuation.hpp"
#include "indefbvp/profiles.hpp"
#include "indefbvp/shooting.hpp"

namespace indefbvp {

/// Shortest decimal text that reads back to the same double (at most 17 digits).
std::string format_number(double x);

struct Columns {
  std::vector<double> x;
  std::vector<double> y;
};

/// Whitespace-separated `x y` rows. Every value round-trips exactly.
void write_columns(const std::filesystem::path& path, std::span<const double> x,
                   std::span<const double> y);
/// Reads `x y` rows, skipping blank lines and lines starting with '#'.
Columns read_columns(const std::filesystem::path& path);

/// Uniform points on [a, b] merged with `extra` points inside it, sorted and deduplicated.
std::vector<double> sample_grid(double a, double b, int n, const std::vector<double>& extra);

/// Which scalar a branch file reports against mu.
enum class BranchCoordinate { L2Gradient, InitialSlope };
BranchCoordinate parse_branch_coordinate(const std::string& s);
const char* to_string(BranchCoordinate c);

nlohmann::json to_json(const PositiveSolution& s, int m);
nlohmann::json to_json(const SolutionSet& set, int m);
nlohmann::json to_json(const LimitInterval& iv);
nlohmann::json to_json(const LimitProfile& p, int m);
nlohmann::json to_json(const Branch& br);

/// Writes `json` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// `profile-<label>.dat` per profile and `profiles.json`; returns the written data files.
std::vector<std::filesystem::path> write_profiles(const std::filesystem::path& dir,
                                                  const WeightFamily& h,
                                                  const std::vector<LimitInterval>& intervals,
                                                  const std::vector<LimitProfile>& profiles,
                                                  int n_grid = 2001);

/// `branch-<k>.dat` (k from 1, in branch order) and `branches.json`.
std::vector<std::filesystem::path> write_branches(const std::filesystem::path& dir,
                                                  const std::vector<Branch>& branches,
                                                  BranchCoordinate coord,
                                                  const nlohmann::json& run_info = {});

/// `solution-<k>.dat` per solution on the sample grid; returns the written data files.
std::vector<std::filesystem::path> write_solutions(const std::filesystem::path& dir,
                                                   const WeightFamily& h, const SolutionSet& set,
                                                   int n_grid = 2001);

}  // namespace indefbvp
