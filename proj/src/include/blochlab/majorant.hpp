#pragma once

#include "blochlab/dyadic.hpp"
#include "blochlab/rational.hpp"
#include "blochlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blochlab {

/// Modulus-of-continuity descriptor w: continuous, non-decreasing,
/// sub-additive, w(0)=0.
class Majorant {
 public:
  enum class Kind { power, tlog, loginv, tabulated };

  static Majorant power(const Rational& alpha) {
    if (alpha <= 0 || alpha > 1) throw std::invalid_argument("power majorant needs alpha in (0,1]");
    Majorant w;
    w.kind_ = Kind::power;
    w.alpha_ = alpha;
    return w;
  }
  static Majorant tlog() {
    Majorant w;
    w.kind_ = Kind::tlog;
    return w;
  }
  static Majorant loginv(const Rational& alpha) {
    if (alpha <= 0) throw std::invalid_argument("loginv majorant needs alpha > 0");
    Majorant w;
    w.kind_ = Kind::loginv;
    w.alpha_ = alpha;
    return w;
  }
  /// Piecewise-linear table of (t, w(t)) pairs; must include t near 0.
  static Majorant tabulated(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw std::invalid_argument("tabulated majorant needs >= 2 samples");
    std::sort(table.begin(), table.end());
    Majorant w;
    w.kind_ = Kind::tabulated;
    w.table_ = std::move(table);
    return w;
  }

  /// Spec strings: "power:1/2", "tlog", "loginv:2", "table:<path>" with one
  /// "t w" pair per line.
  static Majorant parse(const std::string& spec) {
    if (spec == "tlog") return tlog();
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    if (head == "power" || head == "loginv") {
      if (colon == std::string::npos) throw std::invalid_argument("majorant spec needs a parameter: " + spec);
      Rational a = parse_rational(spec.substr(colon + 1));
      return head == "power" ? power(a) : loginv(a);
    }
    if (head == "table") {
      std::ifstream in(spec.substr(colon + 1));
      if (!in) throw std::invalid_argument("cannot open majorant table: " + spec);
      std::vector<std::pair<double, double>> table;
      double t, v;
      while (in >> t >> v) table.emplace_back(t, v);
      return tabulated(std::move(table));
    }
    throw std::invalid_argument("unknown majorant spec: " + spec);
  }

  Kind kind() const { return kind_; }
  const Rational& alpha() const { return alpha_; }

  double eval(double t) const {
    if (t < 0.0 || t > 1.0) throw std::domain_error("majorant argument outside [0,1]");
    if (t == 0.0) return 0.0;
    switch (kind_) {
      case Kind::power:
        return std::pow(t, to_double(alpha_));
      case Kind::tlog:
        return t * (1.0 - std::log(t));
      case Kind::loginv:
        return std::pow(1.0 - std::log(t), -to_double(alpha_));
      case Kind::tabulated: {
        if (t <= table_.front().first) {
          // linear toward w(0)=0 below the first sample
          return table_.front().second * (t / table_.front().first);
        }
        auto it = std::lower_bound(table_.begin(), table_.end(), std::make_pair(t, -1.0));
        if (it == table_.end()) return table_.back().second;
        if (it->first == t) return it->second;
        auto prev = std::prev(it);
        double u = (t - prev->first) / (it->first - prev->first);
        return prev->second + u * (it->second - prev->second);
      }
    }
    return 0.0;
  }

  /// Structural checks on a geometric grid: non-decreasing, and the
  /// sub-additivity consequence w(s)/s <= 2 w(t)/t for s < t.
  void check_structure(int grid_depth = 30) const {
    double prev = eval(1.0);
    for (int j = 1; j <= grid_depth; ++j) {
      double t = std::ldexp(1.0, -j);
      double v = eval(t);
      if (v > prev * (1.0 + 1e-12)) throw std::runtime_error("majorant is not non-decreasing");
      prev = v;
    }
    for (int j = 0; j < grid_depth; ++j) {
      double t = std::ldexp(1.0, -j);
      double s = t / 2.0;
      if (eval(s) / s > 2.0 * eval(t) / t * (1.0 + 1e-12))
        throw std::runtime_error("majorant violates the sub-additivity surrogate");
    }
  }

  double smallest_tabulated_t() const {
    return kind_ == Kind::tabulated ? table_.front().first : 0.0;
  }

  std::string spec_string() const {
    switch (kind_) {
      case Kind::power: return "power:" + format_rational(alpha_);
      case Kind::tlog: return "tlog";
      case Kind::loginv: return "loginv:" + format_rational(alpha_);
      default: return "table";
    }
  }

 private:
  Kind kind_ = Kind::power;
  Rational alpha_ = Rational(1, 2);
  std::vector<std::pair<double, double>> table_;
};

inline double eval_majorant(const Majorant& w, const Rational& t, double precision = 1e-12) {
  if (precision <= 0.0) throw std::invalid_argument("precision must be positive");
  if (t < 0 || t > 1) throw std::domain_error("majorant argument outside [0,1]");
  return w.eval(to_double(t));
}

struct DiniReport {
  Verdict verdict = Verdict::inconclusive;
  double value = std::nan("");
  std::vector<double> partials;  // cumulative sums over dyadic scales
  std::string note;
};

namespace detail {

/// Adaptive Simpson on [a,b] for a smooth integrand.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int depth = 24) {
  auto simpson = [&f](double x0, double x1) {
    double m = 0.5 * (x0 + x1);
    return (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(m) + f(x1));
  };
  struct Rec {
    double a, b, whole;
    int depth;
  };
  double total = 0.0;
  std::vector<Rec> stack{{a, b, simpson(a, b), depth}};
  while (!stack.empty()) {
    Rec r = stack.back();
    stack.pop_back();
    double m = 0.5 * (r.a + r.b);
    double left = simpson(r.a, m), right = simpson(m, r.b);
    if (r.depth <= 0 || std::abs(left + right - r.whole) < 15.0 * tol) {
      total += left + right + (left + right - r.whole) / 15.0;
      continue;
    }
    stack.push_back({r.a, m, left, r.depth - 1});
    stack.push_back({m, r.b, right, r.depth - 1});
  }
  return total;
}

}  // namespace detail

/// Integral of w(t)/t over (0,1]: numeric sum over dyadic scales plus a
/// closed-form tail for the analytic kinds.
inline DiniReport dini_integral(const Majorant& w, double tol = 1e-9) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  DiniReport out;
  auto integrand = [&w](double t) { return w.eval(t) / t; };

  int scales = 0;
  double tail = 0.0;
  bool divergent = false;
  switch (w.kind()) {
    case Majorant::Kind::power: {
      scales = 40;
      double a = to_double(w.alpha());
      tail = std::pow(std::ldexp(1.0, -scales), a) / a;
      break;
    }
    case Majorant::Kind::tlog: {
      scales = 40;
      double e = std::ldexp(1.0, -scales);
      tail = e * (2.0 - std::log(e));
      break;
    }
    case Majorant::Kind::loginv: {
      double a = to_double(w.alpha());
      scales = 40;
      if (a <= 1.0) {
        divergent = true;
      } else {
        double u = 1.0 - std::log(std::ldexp(1.0, -scales));
        tail = std::pow(u, 1.0 - a) / (a - 1.0);
      }
      break;
    }
    case Majorant::Kind::tabulated: {
      double t0 = w.smallest_tabulated_t();
      if (t0 > std::ldexp(1.0, -16)) {
        out.verdict = Verdict::inconclusive;
        out.note = "tabulated majorant lacks resolution near 0";
        return out;
      }
      scales = int(std::floor(-std::log2(t0)));
      // below the first sample the table is linear toward 0, so w(t)/t is
      // constant there and the tail integrates exactly
      tail = (w.eval(t0) / t0) * t0;
      break;
    }
  }

  double sum = 0.0;
  for (int j = 0; j < scales; ++j) {
    double hi = std::ldexp(1.0, -j), lo = hi / 2.0;
    sum += detail::adaptive_simpson(integrand, lo, hi, tol / (4.0 * scales));
    out.partials.push_back(sum);
  }
  if (divergent) {
    out.verdict = Verdict::diverging;
    out.note = "per-scale terms do not decay";
    return out;
  }
  out.verdict = Verdict::converging;
  out.value = sum + tail;
  return out;
}

struct AAResult {
  bool pass = true;
  double witness_s = 0.0, witness_t = 0.0;  // pair with s < t and f(s) < f(t)
};

/// Checks that w(t)/t^gamma is non-increasing in t on the geometric grid
/// 2^-j and its midpoints.
inline AAResult aa_exponent_check(const Majorant& w, const Rational& gamma, int grid_depth = 30) {
  if (gamma <= 0 || gamma >= 1) throw std::invalid_argument("gamma must lie in (0,1)");
  double g = to_double(gamma);
  auto f = [&](double t) { return w.eval(t) / std::pow(t, g); };
  std::vector<double> grid;
  for (int j = grid_depth; j >= 1; --j) {
    grid.push_back(std::ldexp(1.0, -j));
    grid.push_back(3.0 * std::ldexp(1.0, -j - 1));
  }
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  AAResult res;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double fs = f(grid[i - 1]), ft = f(grid[i]);
    if (ft > fs * (1.0 + 1e-12)) {
      res.pass = false;
      res.witness_s = grid[i - 1];
      res.witness_t = grid[i];
      return res;
    }
  }
  return res;
}

namespace detail {

/// G(x) = integral of log w(t) over [0,x], by dyadic pieces toward the
/// integrable singularity at 0.
inline double log_w_primitive(const Majorant& w, double x, double tol = 1e-11) {
  if (x <= 0.0) return 0.0;
  auto f = [&w](double t) { return std::log(w.eval(t)); };
  double total = 0.0;
  for (int j = 0; j < 1000; ++j) {
    double hi = std::ldexp(x, -j), lo = hi / 2.0;
    double piece = adaptive_simpson(f, lo, hi, tol / 8.0);
    total += piece;
    if (std::abs(piece) < tol && hi < 1e-12) break;
    if (hi < 1e-300) break;
  }
  return total;
}

}  // namespace detail

/// w-entropy of a closed set: integral of log w(dist(theta, E)) over the
/// circle, via exact gap decomposition of each generation's survivor arcs.
inline TailReport w_entropy(const DyadicClosedSet& E, const Majorant& w, int depth) {
  if (depth > E.depth()) throw std::invalid_argument("closed set not defined to requested depth");
  for (int j = 1; j <= 20; ++j)
    if (!(w.eval(std::ldexp(1.0, -j)) > 0.0))
      throw std::runtime_error("majorant is not strictly positive on (0,1]");
  TailReport rep;
  if (depth == 0 || E.has_full_generation())
    rep.note = "measure-zero violation: a generation keeps every arc";
  for (int n = 1; n <= depth; ++n) {
    const auto& lv = E.level(n);
    double val = 0.0;
    if (lv.size() < (std::uint64_t(1) << n)) {
      double len = std::ldexp(1.0, -n);
      for (std::size_t i = 0; i < lv.size(); ++i) {
        double hi_cur = (double(lv[i]) + 1.0) * len;
        double lo_next = (i + 1 < lv.size()) ? double(lv[i + 1]) * len : double(lv[0]) * len + 1.0;
        double gap = lo_next - hi_cur;
        if (gap > 0.0) val += 2.0 * detail::log_w_primitive(w, gap / 2.0);
      }
    }
    TailReport::Entry e;
    e.level = n;
    e.contribution = val;
    e.cumulative = val;  // refinement value, not a partial sum
    rep.per_level.push_back(e);
  }
  // Cauchy-decrement verdict over the last 4 depths
  if (int(rep.per_level.size()) >= 4 && rep.note.empty()) {
    std::size_t n = rep.per_level.size();
    double worst = 0.0;
    for (std::size_t i = n - 3; i < n; ++i)
      worst = std::max(worst, std::abs(rep.per_level[i].contribution -
                                       rep.per_level[i - 1].contribution));
    rep.tail_ratio = worst;
    rep.verdict = worst < 1e-3 ? Verdict::converging : Verdict::diverging;
  } else {
    rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

}  // namespace blochlab
