#include "indefbvp/weights.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "indefbvp/errors.hpp"

namespace indefbvp {

namespace {

constexpr double kSnapDistance = 1e-10;
constexpr double kBisectWidth = 1e-15;

struct Run {
  int sign;
  std::size_t first;
  std::size_t last;
};

// Boundary of the negative support {h < -tol} inside [lo, hi], where the predicate is false
// at `lo` and true at `hi` (or the reverse when `rising` is false).
double locate_boundary(const std::function<double(double)>& h, double lo, double hi, double tol,
                       bool rising, const std::vector<double>& breakpoints) {
  auto negative = [&](double t) { return h(t) < -tol; };
  auto target = [&](double t) { return negative(t) == rising; };

  for (double bp : breakpoints) {
    if (bp <= lo || bp >= hi) continue;
    const double left = std::nextafter(bp, lo);
    const double right = std::nextafter(bp, hi);
    if (target(left)) {
      hi = left;
    } else if (target(right)) {
      return bp;
    } else {
      lo = right;
    }
    break;
  }
  while (hi - lo > kBisectWidth * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (target(mid) ? hi : lo) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (double bp : breakpoints) {
    if (std::abs(bp - t) <= kSnapDistance) return bp;
  }
  return t;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

SignStructure::Interval SignStructure::plus_interval(int i) const {
  if (i < 1 || i > m) throw std::out_of_range("positivity interval index out of range");
  return {sigma[static_cast<std::size_t>(i - 1)], tau[static_cast<std::size_t>(i)]};
}

SignStructure::Interval SignStructure::minus_interval(int i) const {
  if (i < 0 || i > m) throw std::out_of_range("negativity interval index out of range");
  return {tau[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(i)]};
}

std::vector<double> SignStructure::interior_points() const {
  std::vector<double> pts;
  for (double s : sigma)
    if (s > a && s < b) pts.push_back(s);
  for (double t : tau)
    if (t > a && t < b) pts.push_back(t);
  return sorted_unique(std::move(pts));
}

SignStructure detect_sign_structure(const std::function<double(double)>& h, double a, double b,
                                    const std::vector<double>& breakpoints, int n_samples,
                                    double tol) {
  if (n_samples < 64) throw std::invalid_argument("detect_sign_structure needs n_samples >= 64");
  if (!(b > a)) throw std::invalid_argument("detect_sign_structure needs a < b");

  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(n_samples) + breakpoints.size() + 1);
  for (int j = 0; j <= n_samples; ++j) edges.push_back(a + (b - a) * j / n_samples);
  std::vector<double> bps;
  for (double bp : breakpoints)
    if (bp > a && bp < b) bps.push_back(bp);
  bps = sorted_unique(std::move(bps));
  edges.insert(edges.end(), bps.begin(), bps.end());
  edges = sorted_unique(std::move(edges));

  std::vector<double> mids(edges.size() - 1);
  std::vector<int> signs(mids.size());
  for (std::size_t j = 0; j < mids.size(); ++j) {
    mids[j] = 0.5 * (edges[j] + edges[j + 1]);
    const double v = h(mids[j]);
    signs[j] = v > tol ? 1 : (v < -tol ? -1 : 0);
  }

  std::vector<Run> runs;
  for (std::size_t j = 0; j < signs.size(); ++j) {
    if (signs[j] == 0) continue;
    if (!runs.empty() && runs.back().sign == signs[j]) {
      runs.back().last = j;
    } else {
      runs.push_back({signs[j], j, j});
    }
  }

  const auto positive_runs =
      std::count_if(runs.begin(), runs.end(), [](const Run& r) { return r.sign > 0; });
  if (positive_runs == 0) throw NoSignChange("weight has no positive part on [a, b]");

  for (const Run& r : runs) {
    if (r.first == r.last && runs.size() > 1) {
      std::ostringstream msg;
      msg << "sign run near t=" << mids[r.first] << " covers a single sample; increase n_samples";
      throw AmbiguousStructure(msg.str());
    }
  }

  SignStructure s;
  s.a = a;
  s.b = b;
  s.m = static_cast<int>(positive_runs);

  // Negativity intervals are the hulls of the negative runs, trimmed to the negative support.
  std::vector<std::pair<double, double>> neg;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (runs[k].sign > 0) continue;
    double lo = a;
    double hi = b;
    if (k > 0) {
      lo = locate_boundary(h, mids[runs[k - 1].last], mids[runs[k].first], tol, true, bps);
    }
    if (k + 1 < runs.size()) {
      hi = locate_boundary(h, mids[runs[k].last], mids[runs[k + 1].first], tol, false, bps);
    }
    neg.emplace_back(lo, hi);
  }

  const bool leading_negative = runs.front().sign < 0;
  const bool trailing_negative = runs.back().sign < 0;
  std::size_t next = 0;
  s.tau.push_back(a);
  if (leading_negative) {
    s.sigma.push_back(neg[next++].second);
  } else {
    s.sigma.push_back(a);
  }
  while (next < neg.size()) {
    const auto [lo, hi] = neg[next++];
    if (next == neg.size() && trailing_negative) {
      s.tau.push_back(lo);
      s.sigma.push_back(b);
      break;
    }
    s.tau.push_back(lo);
    s.sigma.push_back(hi);
  }
  if (!trailing_negative) {
    s.tau.push_back(b);
    s.sigma.push_back(b);
  }

  if (static_cast<int>(s.tau.size()) != s.m + 1 || static_cast<int>(s.sigma.size()) != s.m + 1) {
    throw AmbiguousStructure("sign pattern does not interleave");
  }
  for (int i = 1; i <= s.m; ++i) {
    const auto plus = s.plus_interval(i);
    if (!(plus.lo < plus.hi)) throw AmbiguousStructure("degenerate positivity interval");
  }
  for (int i = 0; i <= s.m; ++i) {
    const auto minus = s.minus_interval(i);
    if (minus.lo > minus.hi) throw AmbiguousStructure("negativity interval out of order");
  }
  return s;
}

WeightFamily::WeightFamily(std::vector<WeightPiece> pieces, std::string descriptor)
    : pieces_(std::move(pieces)), descriptor_(std::move(descriptor)) {
  if (pieces_.empty()) throw std::invalid_argument("weight needs at least one piece");
  a_ = pieces_.front().t0;
  b_ = pieces_.back().t1;
  for (std::size_t k = 0; k + 1 < pieces_.size(); ++k) {
    if (pieces_[k].t1 != pieces_[k + 1].t0) {
      throw std::invalid_argument("weight pieces must be contiguous");
    }
    breakpoints_.push_back(pieces_[k].t1);
  }
}

WeightFamily WeightFamily::from_pieces(std::vector<WeightPiece> pieces, std::string descriptor) {
  return build(std::move(pieces), std::move(descriptor), {});
}

WeightFamily WeightFamily::build(std::vector<WeightPiece> pieces, std::string descriptor,
                                 const std::vector<double>& sign_points) {
  WeightFamily w(std::move(pieces), std::move(descriptor));
  w.breakpoints_.insert(w.breakpoints_.end(), sign_points.begin(), sign_points.end());
  w.breakpoints_ = sorted_unique(std::move(w.breakpoints_));
  auto eval = [&w](double t) { return w(t); };
  try {
    w.structure_ = detect_sign_structure(eval, w.a_, w.b_, w.breakpoints_);
  } catch (const NoSignChange&) {
    w.structure_.reset();
  }
  if (w.structure_) {
    const auto report = check_exactness_hypotheses(w);
    w.properties_.is_symmetric_per_plus_interval =
        std::all_of(report.intervals.begin(), report.intervals.end(),
                    [](const IntervalHypotheses& r) { return r.symmetric; });
    w.properties_.is_monotone_half_per_plus_interval =
        std::all_of(report.intervals.begin(), report.intervals.end(),
                    [](const IntervalHypotheses& r) { return r.monotone_half; });
  }
  return w;
}

WeightFamily WeightFamily::sinusoid(int k, double a, double b) {
  if (k < 1) throw std::invalid_argument("sinusoid needs k >= 1");
  const double w = k * std::numbers::pi / (b - a);
  // The zeros a + j(b-a)/k are declared so detected sigma/tau snap onto them exactly.
  std::vector<double> zeros;
  for (int j = 1; j < k; ++j) zeros.push_back(a + (b - a) * j / k);
  return build({{a, b, [w, a](double t) { return std::sin(w * (t - a)); }}},
               "sin:" + std::to_string(k), zeros);
}

WeightFamily WeightFamily::constant(double c, double a, double b) {
  std::ostringstream d;
  d << "const:" << c;
  return from_pieces({{a, b, [c](double) { return c; }}}, d.str());
}

WeightFamily WeightFamily::piecewise_polynomial(const std::vector<double>& knots,
                                                const std::vector<std::vector<double>>& coeffs) {
  if (knots.size() < 2 || coeffs.size() + 1 != knots.size()) {
    throw std::invalid_argument("piecewise polynomial needs one coefficient list per knot span");
  }
  std::vector<WeightPiece> pieces;
  std::ostringstream d;
  d << "poly:[";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (!(knots[k] < knots[k + 1])) throw std::invalid_argument("knots must increase");
    auto c = coeffs[k];
    pieces.push_back({knots[k], knots[k + 1], [c](double t) {
                        double acc = 0.0;
                        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
                        return acc;
                      }});
    d << (k ? ",(" : "(") << knots[k] << ',' << knots[k + 1];
    for (double x : c) d << ',' << x;
    d << ')';
  }
  d << ']';
  return from_pieces(std::move(pieces), d.str());
}

WeightFamily WeightFamily::moore_nehari() {
  return from_pieces({{0.0, 1.0, [](double t) { return (2.0 * t - 1.0) * (2.0 * t - 1.0); }}},
                     "moore-nehari");
}

WeightFamily WeightFamily::h3sols() {
  return from_pieces(
      {{0.0, 0.5, [](double t) { return (t - 0.25) * (t - 0.25); }},
       {0.5, 1.0, [](double t) { return -std::sin(4.0 * std::numbers::pi * t); }}},
      "h3sols");
}

WeightFamily WeightFamily::sin3_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("sin3-eps needs 0 <= eps < 1");
  std::ostringstream d;
  d << "sin3-eps:" << eps;
  const double L = 1.0 - eps;
  std::vector<WeightPiece> pieces{
      {0.0, L, [L](double t) { return std::sin(3.0 * std::numbers::pi * t / L); }}};
  if (eps > 0.0) pieces.push_back({L, 1.0, [](double) { return 0.0; }});
  return build(std::move(pieces), d.str(), {L / 3.0, 2.0 * L / 3.0});
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  const std::string t = trim(s);
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number in weight descriptor: '" + t + "'");
  }
  if (used != t.size()) throw std::invalid_argument("bad number in weight descriptor: '" + t + "'");
  return v;
}

}  // namespace

WeightFamily WeightFamily::parse(const std::string& descriptor) {
  std::string d = trim(descriptor);
  std::string head = d;
  std::string arg;
  const auto sep = d.find_first_of(": ");
  if (sep != std::string::npos) {
    head = d.substr(0, sep);
    arg = trim(d.substr(sep + 1));
  }
  if (head == "sin") return sinusoid(static_cast<int>(parse_number(arg)));
  if (head == "const") return constant(parse_number(arg));
  if (head == "moore-nehari") return moore_nehari();
  if (head == "h3sols") return h3sols();
  if (head == "sin3-eps") return sin3_eps(parse_number(arg));
  if (head == "poly") {
    if (arg.rfind("piecewise", 0) == 0) arg = trim(arg.substr(9));
    std::vector<double> knots;
    std::vector<std::vector<double>> coeffs;
    std::size_t pos = 0;
    while ((pos = arg.find('(', pos)) != std::string::npos) {
      const auto close = arg.find(')', pos);
      if (close == std::string::npos) throw std::invalid_argument("unbalanced '(' in poly weight");
      std::vector<double> nums;
      std::stringstream ss(arg.substr(pos + 1, close - pos - 1));
      std::string item;
      while (std::getline(ss, item, ',')) nums.push_back(parse_number(item));
      if (nums.size() < 3) throw std::invalid_argument("poly piece needs (t0,t1,c0,...)");
      if (knots.empty()) {
        knots.push_back(nums[0]);
      } else if (knots.back() != nums[0]) {
        throw std::invalid_argument("poly pieces must be contiguous");
      }
      knots.push_back(nums[1]);
      coeffs.emplace_back(nums.begin() + 2, nums.end());
      pos = close + 1;
    }
    return piecewise_polynomial(knots, coeffs);
  }
  throw std::invalid_argument("unknown weight descriptor: '" + descriptor + "'");
}

double WeightFamily::operator()(double t) const {
  // Pieces are [t0, t1); the last one is closed on the right.
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double x, const WeightPiece& p) { return x < p.t1; });
  if (it == pieces_.end()) it = std::prev(pieces_.end());
  return it->f(t);
}

double WeightFamily::plus(double t) const { return std::max((*this)(t), 0.0); }

double WeightFamily::minus(double t) const { return std::max(-(*this)(t), 0.0); }

double WeightFamily::eval_mu(double mu, double t) const {
  const double v = (*this)(t);
  return v >= 0.0 ? v : mu * v;
}

const SignStructure& WeightFamily::structure() const {
  if (!structure_) throw NoSignChange("weight '" + descriptor_ + "' has no positivity interval");
  return *structure_;
}

double WeightFamily::reflection_defect(int n) const {
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = a_ + (b_ - a_) * (j + 0.5) / n;
    worst = std::max(worst, std::abs((*this)(t) - (*this)(a_ + b_ - t)));
  }
  return worst;
}

std::vector<double> WeightFamily::step_points() const {
  std::vector<double> pts = breakpoints_;
  if (structure_) {
    const auto inner = structure_->interior_points();
    pts.insert(pts.end(), inner.begin(), inner.end());
  }
  return sorted_unique(std::move(pts));
}

IntervalHypotheses check_arch_hypotheses(const std::function<double(double)>& q, double c,
                                         double d, double tol, int n_grid) {
  IntervalHypotheses r;
  std::vector<double> v(static_cast<std::size_t>(n_grid));
  for (int j = 0; j < n_grid; ++j) {
    v[static_cast<std::size_t>(j)] = std::max(q(c + (d - c) * (j + 0.5) / n_grid), 0.0);
  }
  for (int j = 0; j < n_grid; ++j) {
    r.symmetry_defect = std::max(
        r.symmetry_defect,
        std::abs(v[static_cast<std::size_t>(j)] - v[static_cast<std::size_t>(n_grid - 1 - j)]));
  }
  // largest drop below the running maximum on the left half
  double running = v.front();
  for (int j = 1; j < (n_grid + 1) / 2; ++j) {
    const double vj = v[static_cast<std::size_t>(j)];
    running = std::max(running, vj);
    r.monotonicity_violation = std::max(r.monotonicity_violation, running - vj);
  }
  r.symmetric = r.symmetry_defect <= tol;
  r.monotone_half = r.monotonicity_violation <= tol;
  return r;
}

ExactnessReport check_exactness_hypotheses(const WeightFamily& h, double tol, int n_grid) {
  const auto& s = h.structure();
  ExactnessReport report;
  report.verdict = true;
  auto eval = [&h](double t) { return h(t); };
  for (int i = 1; i <= s.m; ++i) {
    const auto iv = s.plus_interval(i);
    auto r = check_arch_hypotheses(eval, iv.lo, iv.hi, tol, n_grid);
    r.index = i;
    report.verdict = report.verdict && r.symmetric && r.monotone_half;
    report.intervals.push_back(r);
  }
  return report;
}

}  // namespace indefbvp
