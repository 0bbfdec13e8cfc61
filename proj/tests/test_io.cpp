#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "indefbvp/io.hpp"

using namespace indefbvp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("indefbvp-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("numbers round-trip through their text form") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng) * std::pow(10.0, (k % 40) - 20);
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e6) == "1e+06");
  CHECK(format_number(-2.5) == "-2.5");
}

TEST_CASE("two-column files round-trip exactly") {
  const auto dir = scratch("columns");
  std::vector<double> x{0.0, 1.0 / 3, -2.5e-17, 1e300}, y{std::acos(-1.0), -0.0, 7.0, 1.0 / 7};
  write_columns(dir / "a.dat", x, y);
  const auto c = read_columns(dir / "a.dat");
  CHECK(c.x == x);
  CHECK(c.y == y);
  std::ofstream(dir / "b.dat") << "# comment\n\n1 2\n";
  CHECK(read_columns(dir / "b.dat").x == std::vector<double>{1.0});
  std::ofstream(dir / "c.dat") << "1\n";
  CHECK_THROWS(read_columns(dir / "c.dat"));
}

TEST_CASE("sample grid merges interior points") {
  const auto t = sample_grid(0.0, 1.0, 5, {1.0 / 3, 0.5, 2.0});
  CHECK(t == std::vector<double>{0.0, 0.25, 1.0 / 3, 0.5, 0.75, 1.0});
}

TEST_CASE("profile files and manifest") {
  const auto dir = scratch("profiles");
  const auto h = WeightFamily::sinusoid(3);
  const auto g = Nonlinearity::power(3.0);
  const auto ivs = solve_limit_intervals(h, g);
  const auto profs = enumerate_profiles(h, ivs);
  const auto files = write_profiles(dir, h, ivs, profs);
  REQUIRE(files.size() == 3);
  for (const char* name : {"profile-10.dat", "profile-01.dat", "profile-11.dat"})
    CHECK(fs::exists(dir / name));
  const auto j = read_json(dir / "profiles.json");
  CHECK(j["profiles"].size() == 3);
  CHECK(j["expected_count"] == 3);
  CHECK(j["intervals"][0]["unique"] == true);
  const auto c = read_columns(dir / "profile-11.dat");
  for (std::size_t i = 0; i < c.x.size(); ++i) CHECK(c.y[i] == profs.back()(c.x[i]));
}

TEST_CASE("branch files round-trip and are reproducible") {
  const auto h = WeightFamily::sinusoid(3);
  const auto g = Nonlinearity::power(3.0);
  const auto profs = enumerate_profiles(h, g);
  const DiscreteModel model(h, g, 400);
  TraceOptions o;
  o.mu_stop = 5.0;
  o.mu_max = 10.0 + 1e-6;
  const auto brs = trace_all(model, profs, 10.0, o);
  const auto d1 = scratch("branches1");
  const auto d2 = scratch("branches2");
  const auto files = write_branches(d1, brs, BranchCoordinate::L2Gradient);
  write_branches(d2, trace_all(model, profs, 10.0, o), BranchCoordinate::L2Gradient);
  REQUIRE(files.size() == 3);
  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto c = read_columns(files[k]);
    REQUIRE(c.x.size() == brs[k].points.size());
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      CHECK(c.x[i] == brs[k].points[i].mu);
      CHECK(c.y[i] == brs[k].points[i].l2_grad_norm);
    }
    CHECK(slurp(files[k]) == slurp(d2 / files[k].filename()));
  }
  CHECK(slurp(d1 / "branches.json") == slurp(d2 / "branches.json"));
  const auto j = read_json(d1 / "branches.json");
  CHECK(j["branches"].size() == 3);
  CHECK(j["coordinate"] == "l2");
  CHECK(j["branches"][0]["termination"] == "mu-stop");
  CHECK(parse_branch_coordinate("uprime0") == BranchCoordinate::InitialSlope);
  CHECK_THROWS(parse_branch_coordinate("x"));
}
