// indefbvp: count, solve, profile and continue positive solutions of
//   u'' + (h+(t) - mu h-(t)) g(u) = 0,  u(a) = 0 = u(b).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "indefbvp/continuation.hpp"
#include "indefbvp/errors.hpp"
#include "indefbvp/io.hpp"
#include "indefbvp/profiles.hpp"
#include "indefbvp/shooting.hpp"
#include "indefbvp/verify.hpp"

namespace fs = std::filesystem;
using namespace indefbvp;

namespace {

enum Exit : int {
  kOk = 0,
  kVerifyFailed = 1,
  kAmbiguous = 2,
  kSolverFailure = 3,
  kUsage = 64,
};

/// Everything a subcommand needs, after flags, config file and environment are merged.
struct RunConfig {
  std::string weight = "sin:3";
  std::string g = "power:3";
  std::vector<double> mu{8.0};
  double mu_start = 1e6;
  double mu_stop = -1.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  double event_tol = 1e-9;
  double newton_tol = 1e-10;
  double fold_tol = 1e-3;
  double alpha_max = 64.0;
  int n_scan = 512;
  int mesh = kDefaultMeshInterior;
  std::optional<double> r;
  std::string coord = "l2";
  fs::path out = ".";
  std::vector<std::string> suites;

  void validate() const {
    for (double tol : {rtol, atol, event_tol, newton_tol, fold_tol})
      if (!(tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (n_scan < 8) throw std::invalid_argument("--n-scan must be at least 8");
    if (!(alpha_max > 0.0)) throw std::invalid_argument("--alpha-max must be positive");
    if (mu.empty()) throw std::invalid_argument("no mu given");
  }

  FindOptions find_options() const {
    FindOptions o;
    o.shooting.rtol = rtol;
    o.shooting.atol = atol;
    o.alpha_max = alpha_max;
    o.n_scan = n_scan;
    o.event_tol = event_tol;
    return o;
  }
};

/// key = value lines; '#' starts a comment. Keys are flag names without the leading dashes.
std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(fmt::format("{}:{}: expected key = value", path.string(), lineno));
    auto key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

double parse_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size())
    throw std::invalid_argument("--" + key + ": not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& s) {
  const double v = parse_double(key, s);
  if (v != static_cast<int>(v)) throw std::invalid_argument("--" + key + ": not an integer: '" + s + "'");
  return static_cast<int>(v);
}

/// "8,20 50" -> {8, 20, 50}
std::vector<double> parse_list(const std::string& key, const std::vector<std::string>& items) {
  std::vector<double> out;
  for (auto item : items) {
    std::replace(item.begin(), item.end(), ',', ' ');
    std::istringstream ss(item);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(key, tok));
  }
  return out;
}

/// String-valued options; the config file fills whatever the command line left unset.
class Options {
 public:
  void add(CLI::App& app, const std::string& key, const std::string& help) {
    app.add_option("--" + key, values_[key], help);
  }
  void add_list(CLI::App& app, const std::string& key, const std::string& help) {
    app.add_option("--" + key, lists_[key], help)->delimiter(',');
  }

  void merge(const CLI::App& app, const std::map<std::string, std::string>& file) {
    for (const auto& [key, value] : file) {
      if (values_.count(key)) {
        if (app.count("--" + key) == 0) values_[key] = value;
      } else if (lists_.count(key)) {
        if (app.count("--" + key) == 0) lists_[key] = {value};
      } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& list(const std::string& key) { return lists_[key]; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::vector<std::string>> lists_;
};

RunConfig build_config(Options& o) {
  RunConfig c;
  if (auto v = o.get("weight")) c.weight = *v;
  if (auto v = o.get("g")) c.g = *v;
  if (!o.list("mu").empty()) c.mu = parse_list("mu", o.list("mu"));
  const auto num = [&](const char* key, double& dst) {
    if (auto v = o.get(key)) dst = parse_double(key, *v);
  };
  num("mu-start", c.mu_start);
  num("mu-stop", c.mu_stop);
  num("rtol", c.rtol);
  num("atol", c.atol);
  num("event-tol", c.event_tol);
  num("newton-tol", c.newton_tol);
  num("fold-tol", c.fold_tol);
  num("alpha-max", c.alpha_max);
  if (auto v = o.get("n-scan")) c.n_scan = parse_int("n-scan", *v);
  if (auto v = o.get("mesh")) c.mesh = parse_int("mesh", *v);
  if (auto v = o.get("r")) c.r = parse_double("r", *v);
  if (auto v = o.get("coord")) c.coord = *v;
  if (auto v = o.get("out")) {
    c.out = *v;
  } else if (const char* env = std::getenv("INDEFBVP_OUT"); env && *env) {
    c.out = env;
  }
  c.validate();
  return c;
}

std::string join(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

/// r tied to the limit profiles unless given; falls back to 0.5 when they cannot be built.
double classification_radius(const RunConfig& c, const WeightFamily& h, const Nonlinearity& g) {
  if (c.r) return *c.r;
  try {
    ProfileOptions po;
    po.find = c.find_options();
    return profile_radius(enumerate_profiles(h, g, po));
  } catch (const Error& e) {
    fmt::print(stderr, "warning: no limit profiles ({}); using r = 0.5\n", e.what());
    return 0.5;
  }
}

void print_solutions(const SolutionSet& set, double mu, int m) {
  fmt::print("mu = {}  count = {}  (r = {:.6g}, R = {:.6g})\n", format_number(mu),
             set.solutions.size(), set.r, set.R);
  fmt::print("  {:>3} {:>22} {:>10} {:>8} {:>12} {:>12} {:>12} {:>14}\n", "k", "alpha", "Lambda",
             "bits", "|w(b)|", "nondeg_tol", "sup", "action");
  for (std::size_t k = 0; k < set.solutions.size(); ++k) {
    const auto& s = set.solutions[k];
    const std::string lam = s.classification_ambiguous ? "ambiguous" : join(s.lambda_set);
    const std::string bits = s.lambda_set.empty() ? "-" : lambda_bits(s.lambda_set, m);
    fmt::print("  {:>3} {:>22.15g} {:>10} {:>8} {:>12.4e} {:>12.4e} {:>12.6g} {:>14.8g}\n", k + 1,
               s.alpha, lam, bits, std::abs(s.w_b), s.nondeg_tol, s.sup_norm, s.action);
  }
  for (const auto& w : set.warnings) fmt::print("  warning: {}\n", w);
}

bool any_ambiguous(const SolutionSet& set) {
  for (const auto& s : set.solutions)
    if (s.classification_ambiguous) return true;
  return false;
}

int cmd_count(const RunConfig& c, bool write_data) {
  const auto h = WeightFamily::parse(c.weight);
  const auto g = Nonlinearity::parse(c.g);
  const int m = h.structure().m;
  auto fo = c.find_options();
  fo.classify.r = classification_radius(c, h, g);
  nlohmann::json report;
  report["weight"] = h.descriptor();
  report["g"] = g.descriptor();
  report["runs"] = nlohmann::json::array();
  bool ambiguous = false;
  for (double mu : c.mu) {
    const auto set = find_all_solutions(h, g, mu, fo);
    print_solutions(set, mu, m);
    ambiguous = ambiguous || any_ambiguous(set);
    auto j = to_json(set, m);
    j["mu"] = mu;
    if (write_data) {
      const fs::path dir = c.mu.size() == 1 ? c.out : c.out / ("mu-" + format_number(mu));
      write_solutions(dir, h, set);
      fmt::print("  wrote {} solution files to {}\n", set.solutions.size(), dir.string());
    }
    report["runs"].push_back(std::move(j));
  }
  if (!write_data) write_json(c.out / "count.json", report);
  if (ambiguous) {
    fmt::print(stderr, "error: ambiguous Lambda classification (see table)\n");
    return kAmbiguous;
  }
  return kOk;
}

int cmd_profiles(const RunConfig& c) {
  const auto h = WeightFamily::parse(c.weight);
  const auto g = Nonlinearity::parse(c.g);
  ProfileOptions po;
  po.find = c.find_options();
  const auto intervals = solve_limit_intervals(h, g, po);
  const auto profiles = enumerate_profiles(h, intervals);
  for (const auto& iv : intervals) {
    fmt::print("I{}+ = [{:.6g}, {:.6g}]: {} solution(s), unique = {}, hypotheses = {}\n",
               iv.interval, iv.pieces.empty() ? 0.0 : iv.pieces.front().lo,
               iv.pieces.empty() ? 0.0 : iv.pieces.front().hi, iv.pieces.size(), iv.unique,
               iv.hypotheses_hold);
    for (const auto& p : iv.pieces)
      fmt::print("    alpha = {:.15g}  sup = {:.6g}  w_end = {:.4e}\n", p.alpha, p.sup_norm, p.w_end);
  }
  const auto files = write_profiles(c.out, h, intervals, profiles);
  fmt::print("{} profiles (expected {}), radius r = {:.6g}\n", profiles.size(),
             expected_profile_count(intervals), profile_radius(profiles));
  for (std::size_t k = 0; k < profiles.size(); ++k)
    fmt::print("  {}  Lambda = {}\n", files[k].string(), join(profiles[k].lambda_set));
  return kOk;
}

int cmd_branch(const RunConfig& c) {
  const auto h = WeightFamily::parse(c.weight);
  const auto g = Nonlinearity::parse(c.g);
  ProfileOptions po;
  po.find = c.find_options();
  const auto profiles = enumerate_profiles(h, g, po);
  const DiscreteModel model(h, g, c.mesh);
  TraceOptions to;
  to.mu_stop = c.mu_stop;
  to.mu_max = std::max(c.mu_start, c.mu_stop) * (1 + 1e-7) + 1e-7;
  to.fold_tol = c.fold_tol;
  to.newton.tol = c.newton_tol;
  const auto branches = trace_all(model, profiles, c.mu_start, to);
  const auto coord = parse_branch_coordinate(c.coord);
  nlohmann::json info;
  info["weight"] = h.descriptor();
  info["g"] = g.descriptor();
  info["mu_start"] = c.mu_start;
  info["mu_stop"] = c.mu_stop;
  info["mesh"] = c.mesh;
  const auto files = write_branches(c.out, branches, coord, info);
  bool failed = false;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    fmt::print("{}  origin {}  {} points  termination {}", files[k].string(), br.origin,
               br.points.size(), br.termination);
    if (!br.points.empty()) fmt::print("  end mu = {:.8g}", br.end().mu);
    fmt::print("\n");
    for (const auto& f : br.folds)
      fmt::print("    fold at mu = {:.8g} (+- {:.2g})\n", f.mu, f.resolution);
    for (const auto& w : br.warnings) fmt::print("    WARN {}\n", w);
    failed = failed || br.termination == "failed";
  }
  for (const auto& group : cluster_endpoints(branches)) {
    if (group.size() < 2) continue;
    fmt::print("endpoint cluster:");
    for (auto i : group) fmt::print(" {}", i + 1);
    fmt::print("  (mu = {:.6g})\n", branches[group.front()].end().mu);
  }
  return failed ? kSolverFailure : kOk;
}

int cmd_verify(const RunConfig& c) {
  std::vector<std::string> suites = c.suites;
  if (suites.empty() || (suites.size() == 1 && suites.front() == "all")) suites = suite_names();
  for (const auto& name : suites) {
    const auto rep = run_suite(name);
    fmt::print("[{}]\n", rep.suite);
    for (const auto& ch : rep.checks)
      fmt::print("  {} {}  measured {:.3e}  limit {:.1e}\n", ch.passed ? "ok  " : "FAIL", ch.name,
                 ch.measured, ch.limit);
    if (const auto* f = rep.first_failure()) {
      fmt::print(stderr, "verify {} failed: {} measured {:.6e} > limit {:.3e}\n", rep.suite,
                 f->name, f->measured, f->limit);
      return kVerifyFailed;
    }
  }
  return kOk;
}

int cmd_hypotheses(const RunConfig& c) {
  const auto h = WeightFamily::parse(c.weight);
  const auto g = Nonlinearity::parse(c.g);
  fmt::print("weight {} on [{}, {}]\n", h.descriptor(), h.a(), h.b());
  const auto& s = h.structure();
  fmt::print("  m = {}\n", s.m);
  for (int i = 1; i <= s.m; ++i) {
    const auto iv = s.plus_interval(i);
    fmt::print("  I{}+ = [{:.12g}, {:.12g}]\n", i, iv.lo, iv.hi);
  }
  const auto rep = check_exactness_hypotheses(h);
  for (const auto& iv : rep.intervals)
    fmt::print("  I{}+: symmetric {} (defect {:.3e}), monotone half {} (violation {:.3e})\n",
               iv.index, iv.symmetric, iv.symmetry_defect, iv.monotone_half,
               iv.monotonicity_violation);
  fmt::print("  exact-count hypotheses: {}\n", rep.verdict ? "hold" : "fail");
  const auto a = audit_hypotheses(g, log_grid(1e-6, 1e6, 241));
  fmt::print("nonlinearity {}\n", g.descriptor());
  fmt::print("  positive: {} (min g {:.3e})\n", a.positive, a.min_value);
  fmt::print("  g'(s) > g(s)/s: {} (margin {:.3e} at s = {:.3e})\n", a.star_shaped, a.star_margin,
             a.star_margin_at);
  fmt::print("  g(s)/s -> 0 at 0: {} ({:.3e}, {:.3e})\n", a.superlinear_at_zero, a.ratio_next_to_min,
             a.ratio_at_min);
  fmt::print("  g(s)/s -> inf: {} ({:.3e}, {:.3e})\n", a.superlinear_at_infinity,
             a.ratio_next_to_max, a.ratio_at_max);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive solutions of u'' + (h+ - mu h-) g(u) = 0 with Dirichlet conditions"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  std::string config_file;
  app.add_option("--config", config_file, "key = value file; command-line flags take precedence");
  opts.add(app, "weight", "weight descriptor: sin:k, const:c, moore-nehari, h3sols, sin3-eps:e, poly:[...]");
  opts.add(app, "g", "nonlinearity descriptor: power:p");
  opts.add_list(app, "mu", "mu value(s), comma separated or repeated");
  opts.add(app, "mu-start", "continuation start (default 1e6)");
  opts.add(app, "mu-stop", "continuation stop (default -1)");
  opts.add(app, "rtol", "integrator relative tolerance");
  opts.add(app, "atol", "integrator absolute tolerance");
  opts.add(app, "event-tol", "first-zero tolerance");
  opts.add(app, "newton-tol", "discrete Newton tolerance");
  opts.add(app, "fold-tol", "fold bracket width, relative in mu");
  opts.add(app, "n-scan", "initial alpha scan points");
  opts.add(app, "alpha-max", "initial upper end of the alpha scan (expanded automatically)");
  opts.add(app, "mesh", "interior nodes of the continuation mesh");
  opts.add(app, "r", "classification radius (default: tied to the limit profiles)");
  opts.add(app, "coord", "branch file coordinate: l2 (||u'||_L2) or uprime0");
  opts.add(app, "out", "output directory (default $INDEFBVP_OUT, else .)");

  auto* count = app.add_subcommand("count", "count and classify solutions at each mu");
  auto* solve = app.add_subcommand("solve", "as count, and write solution-<k>.dat files");
  auto* profiles = app.add_subcommand("profiles", "limit profiles as mu -> infinity");
  auto* branch = app.add_subcommand("branch", "continue every profile from mu-start to mu-stop");
  auto* verify = app.add_subcommand("verify", "run property suites");
  auto* hypotheses = app.add_subcommand("hypotheses", "sign structure and hypothesis margins");
  std::vector<std::string> suites;
  verify->add_option("suite", suites, "derivative, symmetry, moroney, scaling, convergence or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  RunConfig cfg;
  try {
    if (!config_file.empty()) opts.merge(app, read_config_file(config_file));
    cfg = build_config(opts);
    cfg.suites = suites;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  }

  try {
    if (*count) return cmd_count(cfg, false);
    if (*solve) return cmd_count(cfg, true);
    if (*profiles) return cmd_profiles(cfg);
    if (*branch) return cmd_branch(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*hypotheses) return cmd_hypotheses(cfg);
  } catch (const AmbiguousClassification& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kAmbiguous;
  } catch (const Error& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kSolverFailure;
  }
  return kUsage;
}
