#include "indefbvp/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace indefbvp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Non-finite values have no JSON literal; they are written as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double branch_value(const BranchPoint& p, BranchCoordinate c) {
  return c == BranchCoordinate::L2Gradient ? p.l2_grad_norm : p.uprime0;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_columns(const fs::path& path, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("column lengths differ");
  auto out = open_out(path);
  std::string line;
  for (std::size_t i = 0; i < x.size(); ++i) {
    line = format_number(x[i]);
    line += ' ';
    line += format_number(y[i]);
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Columns read_columns(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Columns c;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string sx, sy;
    if (!(ss >> sx >> sy)) throw std::runtime_error("malformed row in " + path.string());
    double vx = 0.0, vy = 0.0;
    const auto rx = std::from_chars(sx.data(), sx.data() + sx.size(), vx);
    const auto ry = std::from_chars(sy.data(), sy.data() + sy.size(), vy);
    if (rx.ec != std::errc{} || ry.ec != std::errc{})
      throw std::runtime_error("malformed number in " + path.string());
    c.x.push_back(vx);
    c.y.push_back(vy);
  }
  return c;
}

std::vector<double> sample_grid(double a, double b, int n, const std::vector<double>& extra) {
  if (n < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  t.back() = b;
  for (double s : extra)
    if (s > a && s < b) t.push_back(s);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

BranchCoordinate parse_branch_coordinate(const std::string& s) {
  if (s == "l2" || s == "l2-grad") return BranchCoordinate::L2Gradient;
  if (s == "uprime0" || s == "slope") return BranchCoordinate::InitialSlope;
  throw std::invalid_argument("unknown branch coordinate '" + s + "' (use l2 or uprime0)");
}

const char* to_string(BranchCoordinate c) {
  return c == BranchCoordinate::L2Gradient ? "l2" : "uprime0";
}

json to_json(const PositiveSolution& s, int m) {
  json j;
  j["mu"] = s.mu;
  j["alpha"] = s.alpha;
  j["lambda_set"] = s.lambda_set;
  j["lambda_bits"] = s.lambda_set.empty() ? std::string() : lambda_bits(s.lambda_set, m);
  j["classification_ambiguous"] = s.classification_ambiguous;
  j["interval_maxima"] = s.interval_maxima;
  j["w_b"] = number(s.w_b);
  j["w_b_prime"] = number(s.w_b_prime);
  j["nondeg_tol"] = s.nondeg_tol;
  j["nondegenerate"] = s.nondegenerate();
  j["sup_norm"] = s.sup_norm;
  j["action"] = number(s.action);
  return j;
}

json to_json(const SolutionSet& set, int m) {
  json j;
  j["count"] = set.solutions.size();
  j["r"] = set.r;
  j["R"] = set.R;
  j["solutions"] = json::array();
  for (const auto& s : set.solutions) j["solutions"].push_back(to_json(s, m));
  j["warnings"] = set.warnings;
  return j;
}

json to_json(const LimitInterval& iv) {
  json j;
  j["interval"] = iv.interval;
  j["unique"] = iv.unique;
  j["hypotheses_hold"] = iv.hypotheses_hold;
  j["pieces"] = json::array();
  for (const auto& p : iv.pieces)
    j["pieces"].push_back({{"choice", p.choice},
                           {"lo", p.lo},
                           {"hi", p.hi},
                           {"alpha", p.alpha},
                           {"sup_norm", p.sup_norm},
                           {"w_end", number(p.w_end)}});
  return j;
}

json to_json(const LimitProfile& p, int m) {
  json j;
  j["label"] = p.label(m);
  j["lambda_set"] = p.lambda_set;
  json alphas = json::object();
  for (const auto& [i, alpha] : p.piece_alphas) alphas[std::to_string(i)] = alpha;
  j["piece_alphas"] = alphas;
  json choices = json::object();
  for (const auto& [i, piece] : p.pieces) choices[std::to_string(i)] = piece.choice;
  j["piece_choices"] = choices;
  j["sup_norm"] = p.sup_norm();
  return j;
}

json to_json(const Branch& br) {
  json j;
  j["origin"] = br.origin;
  j["termination"] = br.termination;
  j["points"] = br.points.size();
  if (!br.points.empty()) {
    const auto& s = br.points.front();
    const auto& e = br.end();
    j["start"] = {{"mu", s.mu}, {"l2_grad_norm", s.l2_grad_norm}, {"uprime0", s.uprime0},
                  {"action", s.action}};
    j["endpoint"] = {{"mu", e.mu},         {"l2_grad_norm", e.l2_grad_norm},
                     {"uprime0", e.uprime0}, {"action", e.action},
                     {"w_b", number(e.w_b)}, {"w_b_discrete", number(e.w_b_discrete)}};
  }
  j["folds"] = json::array();
  for (const auto& f : br.folds) {
    const auto c = branch_coordinates(f.solution);
    j["folds"].push_back({{"mu", f.mu},
                          {"resolution", f.resolution},
                          {"index", f.index},
                          {"l2_grad_norm", c.l2_grad_norm},
                          {"uprime0", c.uprime0},
                          {"w_b_sign_change", f.w_b_sign_change}});
  }
  json actions = json::array();
  for (const auto& p : br.points) actions.push_back({p.mu, p.action});
  j["actions"] = actions;
  j["warnings"] = json::array();
  for (const auto& w : br.warnings) j["warnings"].push_back({{"level", "WARN"}, {"message", w}});
  return j;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

std::vector<fs::path> write_profiles(const fs::path& dir, const WeightFamily& h,
                                     const std::vector<LimitInterval>& intervals,
                                     const std::vector<LimitProfile>& profiles, int n_grid) {
  const int m = h.structure().m;
  const auto t = sample_grid(h.a(), h.b(), n_grid, h.step_points());
  std::vector<fs::path> files;
  json manifest;
  manifest["weight"] = h.descriptor();
  manifest["m"] = m;
  manifest["intervals"] = json::array();
  for (const auto& iv : intervals) manifest["intervals"].push_back(to_json(iv));
  manifest["expected_count"] = expected_profile_count(intervals);
  manifest["profiles"] = json::array();
  std::vector<double> u(t.size());
  for (const auto& p : profiles) {
    for (std::size_t i = 0; i < t.size(); ++i) u[i] = p(t[i]);
    const auto name = "profile-" + p.label(m) + ".dat";
    write_columns(dir / name, t, u);
    files.push_back(dir / name);
    auto j = to_json(p, m);
    j["file"] = name;
    manifest["profiles"].push_back(std::move(j));
  }
  write_json(dir / "profiles.json", manifest);
  return files;
}

std::vector<fs::path> write_branches(const fs::path& dir, const std::vector<Branch>& branches,
                                     BranchCoordinate coord, const json& run_info) {
  std::vector<fs::path> files;
  json manifest = run_info.is_object() ? run_info : json::object();
  manifest["coordinate"] = to_string(coord);
  manifest["branches"] = json::array();
  std::vector<double> mu, y;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    mu.clear();
    y.clear();
    for (const auto& p : br.points) {
      mu.push_back(p.mu);
      y.push_back(branch_value(p, coord));
    }
    const auto name = "branch-" + std::to_string(k + 1) + ".dat";
    write_columns(dir / name, mu, y);
    files.push_back(dir / name);
    auto j = to_json(br);
    j["file"] = name;
    manifest["branches"].push_back(std::move(j));
  }
  json clusters = json::array();
  for (const auto& group : cluster_endpoints(branches)) {
    json g = json::array();
    for (auto i : group) g.push_back(i + 1);
    clusters.push_back(g);
  }
  manifest["endpoint_clusters"] = clusters;
  write_json(dir / "branches.json", manifest);
  return files;
}

std::vector<fs::path> write_solutions(const fs::path& dir, const WeightFamily& h,
                                      const SolutionSet& set, int n_grid) {
  const int m = h.has_structure() ? h.structure().m : 0;
  const auto t = sample_grid(h.a(), h.b(), n_grid, h.step_points());
  std::vector<fs::path> files;
  json manifest = to_json(set, m);
  manifest["weight"] = h.descriptor();
  std::vector<double> u(t.size());
  for (std::size_t k = 0; k < set.solutions.size(); ++k) {
    const auto& s = set.solutions[k];
    for (std::size_t i = 0; i < t.size(); ++i) u[i] = s(t[i]);
    const auto name = "solution-" + std::to_string(k + 1) + ".dat";
    write_columns(dir / name, t, u);
    files.push_back(dir / name);
    manifest["solutions"][k]["file"] = name;
  }
  write_json(dir / "solutions.json", manifest);
  return files;
}

}  // namespace indefbvp
