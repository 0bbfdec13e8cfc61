#include "indefbvp/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "indefbvp/errors.hpp"

namespace indefbvp {

double LimitPiece::operator()(double t) const {
  if (t <= lo || t >= hi) return 0.0;
  return trajectory(t)[0];
}

LimitInterval solve_limit_interval(const WeightFamily& h, const Nonlinearity& g, int i,
                                   const ProfileOptions& opt) {
  const auto& s = h.structure();
  if (i < 1 || i > s.m) throw std::invalid_argument("positivity interval index out of range");
  const auto iv = s.plus_interval(i);
  const auto p = make_limit_problem(h, g, iv.lo, iv.hi);
  FindOptions find = opt.find;
  find.parallel = false;  // intervals already run concurrently
  const auto search = find_roots(p, find);
  if (search.roots.empty()) {
    std::ostringstream msg;
    msg << "no positive limit solution on positivity interval " << i << " [" << iv.lo << ", "
        << iv.hi << "]";
    throw NoSolution(msg.str());
  }
  LimitInterval out;
  out.interval = i;
  const auto hyp = check_arch_hypotheses([&h](double t) { return h.plus(t); }, iv.lo, iv.hi);
  out.hypotheses_hold = hyp.symmetric && hyp.monotone_half;
  out.unique = search.roots.size() == 1 && out.hypotheses_hold;
  for (std::size_t j = 0; j < search.roots.size(); ++j) {
    const auto sol = make_solution(p, nullptr, 0.0, search.roots[j].alpha, find.shooting);
    LimitPiece piece;
    piece.interval = i;
    piece.choice = static_cast<int>(j);
    piece.lo = iv.lo;
    piece.hi = iv.hi;
    piece.alpha = sol.alpha;
    piece.trajectory = sol.trajectory;
    piece.w_end = sol.w_b;
    piece.sup_norm = sol.sup_norm;
    const int n = std::max(opt.grid_points, 3);
    piece.grid.resize(static_cast<std::size_t>(n));
    piece.values.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double t = iv.lo + (iv.hi - iv.lo) * k / (n - 1);
      piece.grid[static_cast<std::size_t>(k)] = t;
      piece.values[static_cast<std::size_t>(k)] =
          (k == 0 || k == n - 1) ? 0.0 : std::max(0.0, sol(t));
    }
    out.pieces.push_back(std::move(piece));
  }
  return out;
}

std::vector<LimitInterval> solve_limit_intervals(const WeightFamily& h, const Nonlinearity& g,
                                                 const ProfileOptions& opt) {
  const int m = h.structure().m;
  std::vector<LimitInterval> out(static_cast<std::size_t>(m));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 1; i <= m; ++i) {
    try {
      out[static_cast<std::size_t>(i - 1)] = solve_limit_interval(h, g, i, opt);
    } catch (...) {
#pragma omp critical(indefbvp_profiles_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double LimitProfile::operator()(double t) const {
  for (const auto& [i, piece] : pieces) {
    if (t > piece.lo && t < piece.hi) {
      const double v = piece(t);
      return v < event_tol ? 0.0 : v;
    }
  }
  return 0.0;
}

double LimitProfile::sup_norm() const {
  double s = 0.0;
  for (const auto& [i, piece] : pieces) s = std::max(s, piece.sup_norm);
  return s;
}

double LimitProfile::min_piece_max() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& [i, piece] : pieces) s = std::min(s, piece.sup_norm);
  return s;
}

std::string LimitProfile::label(int m) const {
  std::string out(static_cast<std::size_t>(m), '0');
  for (const auto& [i, piece] : pieces) {
    out[static_cast<std::size_t>(i - 1)] = static_cast<char>('1' + piece.choice);
  }
  return out;
}

std::size_t expected_profile_count(const std::vector<LimitInterval>& intervals) {
  std::size_t n = 1;
  for (const auto& iv : intervals) n *= 1 + iv.pieces.size();
  return n - 1;
}

std::vector<LimitProfile> enumerate_profiles(const WeightFamily& h,
                                             const std::vector<LimitInterval>& intervals) {
  std::vector<LimitProfile> out;
  // Mixed-radix counter: digit i is 0 (interval off) or 1 + the chosen piece.
  std::vector<std::size_t> digit(intervals.size(), 0);
  while (true) {
    std::size_t k = 0;
    for (; k < digit.size(); ++k) {
      if (++digit[k] <= intervals[k].pieces.size()) break;
      digit[k] = 0;
    }
    if (k == digit.size()) break;
    LimitProfile prof;
    prof.a = h.a();
    prof.b = h.b();
    for (std::size_t i = 0; i < digit.size(); ++i) {
      if (digit[i] == 0) continue;
      const auto& piece = intervals[i].pieces[digit[i] - 1];
      prof.lambda_set.push_back(piece.interval);
      prof.pieces.emplace(piece.interval, piece);
      prof.piece_alphas.emplace(piece.interval, piece.alpha);
    }
    out.push_back(std::move(prof));
  }
  std::sort(out.begin(), out.end(), [](const LimitProfile& x, const LimitProfile& y) {
    if (x.lambda_set.size() != y.lambda_set.size()) return x.lambda_set.size() < y.lambda_set.size();
    if (x.lambda_set != y.lambda_set) return x.lambda_set < y.lambda_set;
    std::vector<int> cx, cy;
    for (const auto& [i, p] : x.pieces) cx.push_back(p.choice);
    for (const auto& [i, p] : y.pieces) cy.push_back(p.choice);
    return cx < cy;
  });
  return out;
}

std::vector<LimitProfile> enumerate_profiles(const WeightFamily& h, const Nonlinearity& g,
                                             const ProfileOptions& opt) {
  return enumerate_profiles(h, solve_limit_intervals(h, g, opt));
}

double profile_distance(const std::function<double(double)>& u, const LimitProfile& prof, int n) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 2 * prof.pieces.size());
  for (int k = 0; k < n; ++k) grid.push_back(prof.a + (prof.b - prof.a) * k / (n - 1));
  for (const auto& [i, piece] : prof.pieces) {
    // The piece maxima matter most; add the piece's own samples.
    for (double t : piece.grid) grid.push_back(t);
  }
  double worst = 0.0;
  for (double t : grid) worst = std::max(worst, std::abs(u(t) - prof(t)));
  return worst;
}

double profile_distance(const PositiveSolution& sol, const LimitProfile& prof, int n) {
  return profile_distance([&sol](double t) { return sol(t); }, prof, n);
}

std::pair<std::size_t, double> nearest_profile(const PositiveSolution& sol,
                                               const std::vector<LimitProfile>& profiles) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const double d = profile_distance(sol, profiles[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

double profile_radius(const std::vector<LimitProfile>& profiles) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& p : profiles) r = std::min(r, p.min_piece_max());
  return 0.1 * r;
}

}  // namespace indefbvp
