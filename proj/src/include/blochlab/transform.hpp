#pragma once

#include "blochlab/dyadic.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace blochlab {

using Complex = std::complex<double>;
using AnalyticFn = std::function<Complex(Complex)>;

/// Interior point of the unit disc; queries too close to the boundary are
/// rejected (default floor 2^-40 on 1-|z|).
struct DiscPoint {
  Complex z;

  static constexpr double kFloor = 9.094947017729282e-13;  // 2^-40

  explicit DiscPoint(Complex value) : z(value) {
    double r = std::abs(z);
    if (!(r < 1.0)) throw std::domain_error("point outside the open unit disc");
    if (1.0 - r < kFloor) throw std::domain_error("point too close to the boundary (1-|z| floor)");
  }

  double radius() const { return std::abs(z); }
  double one_minus_r() const { return 1.0 - std::abs(z); }
  /// Angle in [0,1) turns.
  double theta() const {
    double t = std::arg(z) / (2.0 * std::numbers::pi);
    if (t < 0.0) t += 1.0;
    return t >= 1.0 ? 0.0 : t;
  }
};

struct TransformValue {
  Complex value{0.0, 0.0};
  double error_bound = 0.0;
};

enum class KernelKind { poisson, herglotz, herglotz_prime };

struct EvalOptions {
  double abs_target = 1e-8;
  double rel_target = 0.0;  // when > 0, also stop once bound <= rel_target * |value|
  double ratio = 0.25;
  int max_depth = DyadicArc::kMaxLevel;
  bool cross_validate = true;  // herglotz_prime only
};

namespace detail {

constexpr double kPi = std::numbers::pi;
constexpr double kRoundSlack = 1.0 + 9.313225746154785e-10;  // 2^-30 relative inflation

/// Minimal |zeta - z| over the closed leaf, from the angular gap.
inline double leaf_min_dist(const DyadicArc& J, double theta_z, double r) {
  double len = std::ldexp(1.0, -J.level);
  double lo = double(J.index) * len, hi = lo + len;
  double delta = 0.0;
  if (!(theta_z >= lo && theta_z <= hi)) {
    double d1 = std::min(std::abs(theta_z - lo), 1.0 - std::abs(theta_z - lo));
    double d2 = std::min(std::abs(theta_z - hi), 1.0 - std::abs(theta_z - hi));
    delta = std::min(d1, d2);
  }
  double s = std::sin(kPi * std::min(delta, 0.5));
  double d2min = (1.0 - r) * (1.0 - r) + 4.0 * r * s * s;
  return std::sqrt(d2min) * (1.0 - 1e-13);
}

inline double kernel_deriv_sup(KernelKind kind, double d, double r) {
  switch (kind) {
    case KernelKind::poisson:
      return 4.0 * kPi * (1.0 - r * r) / (d * d * d);
    case KernelKind::herglotz:
      return 4.0 * kPi * r / (d * d);
    case KernelKind::herglotz_prime:
      return 2.0 * kPi * (2.0 / (d * d) + 4.0 / (d * d * d));
  }
  return 0.0;
}

inline Complex kernel_value(KernelKind kind, double theta, Complex z) {
  Complex zeta = std::polar(1.0, 2.0 * kPi * theta);
  switch (kind) {
    case KernelKind::poisson: {
      double num = 1.0 - std::norm(z);
      return Complex(num / std::norm(zeta - z), 0.0);
    }
    case KernelKind::herglotz:
      return (zeta + z) / (zeta - z);
    case KernelKind::herglotz_prime: {
      Complex d = zeta - z;
      return 2.0 * zeta / (d * d);
    }
  }
  return {};
}

struct Leaf {
  DyadicArc arc;
  double mass;
  double bound;
  Complex contrib;
};

}  // namespace detail

/// Adaptive atomization: leaves from adaptive_leaves, each leaf's mass at its
/// center, per-leaf certified bound mass * |J| * sup |d kernel / d theta|;
/// the worst leaf is split until the total bound meets the target.
inline TransformValue evaluate_transform(const DyadicMeasure& nu, KernelKind kind,
                                         const DiscPoint& p, const EvalOptions& opt = {}) {
  double r = p.radius(), theta_z = p.theta();
  auto make_leaf = [&](const DyadicArc& J) {
    detail::Leaf lf;
    lf.arc = J;
    lf.mass = nu.mass_d(J);
    if (lf.mass == 0.0) {
      lf.bound = 0.0;
      return lf;
    }
    double d = detail::leaf_min_dist(J, theta_z, r);
    lf.bound = lf.mass * std::ldexp(1.0, -J.level) * detail::kernel_deriv_sup(kind, d, r) *
               detail::kRoundSlack;
    lf.contrib = lf.mass * detail::kernel_value(kind, to_double(lf.arc.center()), p.z);
    return lf;
  };

  auto cmp = [](const detail::Leaf& a, const detail::Leaf& b) { return a.bound < b.bound; };
  std::priority_queue<detail::Leaf, std::vector<detail::Leaf>, decltype(cmp)> heap(cmp);
  double total_bound = 0.0;
  Complex running{0.0, 0.0};
  for (const DyadicArc& J : adaptive_leaves(theta_z, p.one_minus_r(), opt.ratio, opt.max_depth)) {
    detail::Leaf lf = make_leaf(J);
    total_bound += lf.bound;
    running += lf.contrib;
    heap.push(std::move(lf));
  }
  auto met = [&] {
    if (total_bound <= opt.abs_target) return true;
    return opt.rel_target > 0.0 && total_bound <= opt.rel_target * std::abs(running);
  };
  while (!met()) {
    detail::Leaf worst = heap.top();
    if (worst.bound <= 0.0) break;
    if (worst.arc.level >= opt.max_depth)
      throw std::runtime_error(
          "transform error bound uncertifiable at requested precision; limiting leaf (" +
          std::to_string(worst.arc.level) + "," + std::to_string(worst.arc.index) + ")");
    heap.pop();
    total_bound -= worst.bound;
    running -= worst.contrib;
    for (DyadicArc c : {worst.arc.left_child(), worst.arc.right_child()}) {
      detail::Leaf lf = make_leaf(c);
      total_bound += lf.bound;
      running += lf.contrib;
      heap.push(std::move(lf));
    }
  }

  TransformValue out;
  std::vector<detail::Leaf> leaves;
  leaves.reserve(heap.size());
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  // deterministic summation order
  std::sort(leaves.begin(), leaves.end(),
            [](const detail::Leaf& a, const detail::Leaf& b) { return a.arc < b.arc; });
  double err = 0.0;
  for (const detail::Leaf& lf : leaves) {
    if (lf.mass == 0.0) continue;
    out.value += lf.contrib;
    err += lf.bound;
  }
  out.error_bound = err * detail::kRoundSlack + std::abs(out.value) * 1e-13;
  return out;
}

inline TransformValue poisson(const DyadicMeasure& nu, const DiscPoint& p,
                              const EvalOptions& opt = {}) {
  TransformValue v = evaluate_transform(nu, KernelKind::poisson, p, opt);
  v.value = Complex(v.value.real(), 0.0);
  return v;
}

inline TransformValue herglotz(const DyadicMeasure& nu, const DiscPoint& p,
                               const EvalOptions& opt = {}) {
  return evaluate_transform(nu, KernelKind::herglotz, p, opt);
}

inline TransformValue herglotz_prime(const DyadicMeasure& nu, const DiscPoint& p,
                                     const EvalOptions& opt = {}) {
  TransformValue v = evaluate_transform(nu, KernelKind::herglotz_prime, p, opt);
  if (opt.cross_validate) {
    double h = p.one_minus_r() / 1000.0;
    TransformValue hp = herglotz(nu, DiscPoint(p.z + h), opt);
    TransformValue hm = herglotz(nu, DiscPoint(p.z - h), opt);
    Complex fd = (hp.value - hm.value) / (2.0 * h);
    // |H'''| <= 12 int d nu / |zeta-z|^4 <= 12 P(nu)(z) / ((1-r^2)(1-r-h)^2)
    TransformValue pv = poisson(nu, p, opt);
    double r = p.radius();
    double m3 = 12.0 * (pv.value.real() + pv.error_bound) /
                ((1.0 - r * r) * (1.0 - r - h) * (1.0 - r - h));
    double tol = v.error_bound + (hp.error_bound + hm.error_bound) / (2.0 * h) +
                 h * h / 6.0 * m3 + 1e-12 * std::abs(v.value);
    if (std::abs(v.value - fd) > tol)
      throw std::runtime_error("herglotz_prime disagrees with the finite-difference check");
  }
  return v;
}

struct InnerValue {
  TransformValue S;
  TransformValue S_prime;
};

/// S = exp(-H(mu)), S' = -H(mu)' * S.
inline InnerValue singular_inner(const DyadicMeasure& mu, const DiscPoint& p,
                                 EvalOptions opt = {}) {
  opt.cross_validate = false;
  TransformValue H = evaluate_transform(mu, KernelKind::herglotz, p, opt);
  TransformValue Hp = evaluate_transform(mu, KernelKind::herglotz_prime, p, opt);
  InnerValue out;
  out.S.value = std::exp(-H.value);
  out.S.error_bound = std::abs(out.S.value) * std::expm1(H.error_bound) * detail::kRoundSlack;
  out.S_prime.value = -Hp.value * out.S.value;
  out.S_prime.error_bound =
      (std::abs(out.S.value) * Hp.error_bound + std::abs(Hp.value) * out.S.error_bound +
       Hp.error_bound * out.S.error_bound) *
      detail::kRoundSlack;
  return out;
}

/// Sample lower bound for sup (1-|z|) |f'(z)| by central differences; points
/// whose stencil leaves the disc are skipped.
inline double bloch_seminorm_sample(const AnalyticFn& f, const std::vector<DiscPoint>& points,
                                    int* skipped = nullptr) {
  double best = 0.0;
  int skip = 0;
  for (const DiscPoint& p : points) {
    double h = p.one_minus_r() / 1000.0;
    if (std::abs(p.z + h) >= 1.0 || std::abs(p.z - h) >= 1.0) {
      ++skip;
      continue;
    }
    Complex fp = (f(p.z + h) - f(p.z - h)) / (2.0 * h);
    best = std::max(best, p.one_minus_r() * std::abs(fp));
  }
  if (skipped) *skipped = skip;
  return best;
}

struct GrowthScan {
  std::vector<Complex> captured;  // grid points with |f(z)| >= delta log(1/(1-|z|))
  std::vector<double> window_distance;  // per boundary window, midpoint to nearest capture
};

inline GrowthScan growth_scan(const AnalyticFn& f, double delta,
                              const std::vector<DiscPoint>& grid, int window_bits = 6) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  GrowthScan out;
  for (const DiscPoint& p : grid) {
    double rhs = delta * std::log(1.0 / p.one_minus_r());
    if (std::abs(f(p.z)) >= rhs) out.captured.push_back(p.z);
  }
  int windows = 1 << window_bits;
  out.window_distance.assign(windows, std::numeric_limits<double>::infinity());
  for (int wi = 0; wi < windows; ++wi) {
    double mid = (wi + 0.5) / windows;
    Complex b = std::polar(1.0, 2.0 * detail::kPi * mid);
    for (const Complex& c : out.captured)
      out.window_distance[wi] = std::min(out.window_distance[wi], std::abs(b - c));
  }
  return out;
}

}  // namespace blochlab
