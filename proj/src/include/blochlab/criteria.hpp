#pragma once

#include "blochlab/dyadic.hpp"
#include "blochlab/report.hpp"
#include "blochlab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace blochlab {

struct ZygmundReport {
  std::vector<Rational> per_level;  // max adjacent density difference, levels 1..n_max
  Rational overall = 0;
};

/// Dyadic-grid surrogate of the Zygmund seminorm: per level, the max over
/// adjacent equal-length dyadic pairs of |nu(I)/|I| - nu(I')/|I'||, exact.
inline ZygmundReport zygmund_seminorm(const DyadicMeasure& nu, int n_max) {
  ZygmundReport rep;
  std::vector<Rational> dens;
  for (int n = 1; n <= n_max; ++n) {
    std::uint64_t count = std::uint64_t(1) << n;
    dens.assign(count, Rational(0));
    nu.enumerate(n, [&](const DyadicArc& I, const Rational& m) {
      dens[I.index] = m * (Int(1) << n);
    });
    Rational best = 0;
    for (std::uint64_t k = 0; k < count; ++k) {
      Rational diff = dens[k] - dens[(k + 1) % count];
      if (diff < 0) diff = -diff;
      if (diff > best) best = diff;
    }
    rep.per_level.push_back(best);
    if (best > rep.overall) rep.overall = best;
  }
  return rep;
}

struct PairConstantReport {
  std::vector<double> per_level;  // minimal admissible C per level
  double C = 0.0;
  DyadicArc worst_I, worst_Iprime;
  Verdict trend = Verdict::inconclusive;
};

namespace detail {

inline void fit_trend(PairConstantReport& rep) {
  std::size_t n = rep.per_level.size();
  if (n < 3) return;
  double last = rep.per_level[n - 1], back = rep.per_level[n - 3];
  if (last == 0.0 && back == 0.0)
    rep.trend = Verdict::converging;
  else if (back > 0.0 && last >= 2.0 * back)
    rep.trend = Verdict::diverging;
  else if (back > 0.0 && last <= 1.1 * back)
    rep.trend = Verdict::converging;
  else
    rep.trend = Verdict::inconclusive;
}

template <class RhsFn>
inline PairConstantReport pair_constant(const DyadicMeasure& nu, int n_max, const RhsFn& rhs) {
  PairConstantReport rep;
  std::vector<double> dens;
  for (int n = 1; n <= n_max; ++n) {
    std::uint64_t count = std::uint64_t(1) << n;
    dens.assign(count, 0.0);
    nu.enumerate(n, [&](const DyadicArc& I, const Rational& m) {
      dens[I.index] = to_double(m) * std::ldexp(1.0, n);
    });
    double best = 0.0;
    std::uint64_t best_k = 0;
    for (std::uint64_t k = 0; k < count; ++k) {
      std::uint64_t k2 = (k + 1) % count;
      double diff = std::abs(dens[k] - dens[k2]);
      if (diff == 0.0) continue;
      double c = diff / rhs(n, k, k2, dens);
      if (c > best) {
        best = c;
        best_k = k;
      }
    }
    rep.per_level.push_back(best);
    if (best > rep.C) {
      rep.C = best;
      rep.worst_I = DyadicArc(n, best_k);
      rep.worst_Iprime = DyadicArc(n, (best_k + 1) % count);
    }
  }
  fit_trend(rep);
  return rep;
}

}  // namespace detail

/// Minimal C with |nu(I)/|I| - nu(I')/|I'|| <= C exp(-nu(I)/|I|) over adjacent
/// dyadic pairs, symmetrized over the orientation (the smaller density gives
/// the weaker right side, hence the binding constraint).
inline PairConstantReport exp_zygmund_constant(const DyadicMeasure& nu, int n_max) {
  return detail::pair_constant(nu, n_max,
                               [](int, std::uint64_t k, std::uint64_t k2,
                                  const std::vector<double>& dens) {
                                 return std::exp(-std::min(dens[k], dens[k2]));
                               });
}

/// As exp_zygmund_constant but the right side is inf over the dyadic
/// ancestors J of the smallest dyadic arc containing both (including the
/// root) of exp(-nu(J)/|J|).
inline PairConstantReport cyclicity_constant(const DyadicMeasure& nu, int n_max) {
  return detail::pair_constant(
      nu, n_max,
      [&nu](int n, std::uint64_t k, std::uint64_t k2, const std::vector<double>&) {
        // smallest dyadic container of the adjacent pair
        int m = n;
        std::uint64_t a = k, b = k2;
        while (m > 0 && a != b) {
          a >>= 1;
          b >>= 1;
          --m;
        }
        double max_dens = 1.0;  // root density for a probability measure
        for (int lvl = m; lvl >= 1; --lvl)
          max_dens = std::max(max_dens,
                              nu.mass_d(DyadicArc(lvl, a >> (m - lvl))) * std::ldexp(1.0, lvl));
        max_dens = std::max(max_dens, nu.mass_d(DyadicArc(0, 0)));
        return std::exp(-max_dens);
      });
}

struct W1Options {
  int quad = 8;       // fine rule is quad x quad; coarse Richardson mate is (quad/2)^2
  int workers = 1;
  double rel_target = 1e-6;  // transform precision per sample point
};

namespace detail {

/// Midpoint tensor rule for |S'| over T_I in polar coordinates,
/// [1-|I|, 1-|I|/2] x I, dA = r dr (2 pi) dtheta.
inline double box_quad(const DyadicMeasure& mu, const DyadicArc& I, int q,
                       double rel_target) {
  double len = std::ldexp(1.0, -I.level);
  double r0 = 1.0 - len, r1 = 1.0 - len / 2.0;
  double t0 = double(I.index) * len;
  EvalOptions opt;
  opt.cross_validate = false;
  opt.abs_target = 1e-300;
  opt.rel_target = rel_target;
  double sum = 0.0;
  for (int i = 0; i < q; ++i) {
    double r = r0 + (i + 0.5) * (r1 - r0) / q;
    for (int j = 0; j < q; ++j) {
      double theta = t0 + (j + 0.5) * len / q;
      Complex z = std::polar(r, 2.0 * kPi * theta);
      EvalOptions hopt = opt;
      hopt.rel_target = 0.0;
      hopt.abs_target = 1e-6;
      TransformValue H = evaluate_transform(mu, KernelKind::herglotz, DiscPoint(z), hopt);
      TransformValue Hp = evaluate_transform(mu, KernelKind::herglotz_prime, DiscPoint(z), opt);
      sum += std::abs(Hp.value) * std::exp(-H.value.real()) * r;
    }
  }
  return sum * ((r1 - r0) / q) * (2.0 * kPi * len / q);
}

struct BoxResult {
  double value = 0.0;
  double err_est = 0.0;
};

inline BoxResult box_with_richardson(const DyadicMeasure& mu, const DyadicArc& I, int quad,
                                     double rel_target) {
  double coarse = box_quad(mu, I, std::max(quad / 2, 1), rel_target);
  double fine = box_quad(mu, I, quad, rel_target);
  BoxResult r;
  r.value = fine + (fine - coarse) / 3.0;
  r.err_est = std::abs(fine - coarse) / 3.0;
  return r;
}

inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = std::size_t(w); i < count; i += std::size_t(workers)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Per level, the sum over E-surviving arcs I of the quadrature of |S'_mu|
/// over the top-half T_I; geometric-tail verdict per Cor-4.2-style truncation.
inline TailReport w1_report(const DyadicMeasure& mu, const DyadicClosedSet& E, int D,
                            const W1Options& opt = {}) {
  if (D > E.depth()) throw std::invalid_argument("closed set not defined to requested depth");
  {
    // dyadic hull check: mu must vanish on arcs whose closed arc misses E
    int check_level = std::min(D, 10);
    mu.enumerate(check_level, [&](const DyadicArc& I, const Rational& m) {
      if (m != 0 && !E.survives(I.level, I.index))
        throw std::invalid_argument("measure is not supported in the closed set's dyadic hull");
    });
  }
  std::vector<DyadicArc> boxes;
  std::vector<std::size_t> level_begin;  // index into boxes per level
  for (int n = 1; n <= D; ++n) {
    level_begin.push_back(boxes.size());
    for (std::uint64_t k : E.level(n)) boxes.emplace_back(n, k);
  }
  level_begin.push_back(boxes.size());

  std::vector<detail::BoxResult> results(boxes.size());
  detail::parallel_for(boxes.size(), opt.workers, [&](std::size_t i) {
    results[i] = detail::box_with_richardson(mu, boxes[i], opt.quad, opt.rel_target);
  });

  TailReport rep;
  double cumulative = 0.0;
  for (int n = 1; n <= D; ++n) {
    double contribution = 0.0, err = 0.0;
    for (std::size_t i = level_begin[n - 1]; i < level_begin[n]; ++i) {
      contribution += results[i].value;
      err += results[i].err_est;
    }
    cumulative += contribution;
    TailReport::Entry e;
    e.level = n;
    e.contribution = contribution;
    e.cumulative = cumulative;
    e.unreliable = err > 0.1 * contribution && contribution > 0.0;
    rep.per_level.push_back(e);
  }
  finalize_tail_verdict(rep);
  return rep;
}

/// Per level, (number of E-surviving arcs) * 2^-n, cumulative sum and verdict.
inline TailReport carleson_sum(const DyadicClosedSet& E, int D) {
  if (D > E.depth()) throw std::invalid_argument("closed set not defined to requested depth");
  TailReport rep;
  double cumulative = 0.0;
  for (int n = 0; n <= D; ++n) {
    double contribution = double(E.level(n).size()) * std::ldexp(1.0, -n);
    cumulative += contribution;
    rep.per_level.push_back({n, contribution, cumulative, false});
  }
  finalize_tail_verdict(rep);
  return rep;
}

struct QBoxResult {
  double integral = 0.0;
  double ratio = 0.0;  // integral / |I|
};

/// Quadrature of |S'_mu| over the Carleson square Q_I via the Whitney tiling
/// by top-halves of dyadic subarcs, down to `depth_cap` levels below I.
inline QBoxResult qbox_check(const DyadicMeasure& mu, const DyadicArc& I, int quad = 8,
                             int depth_cap = 8, double rel_target = 1e-6) {
  if (mu.mass(I) != 0)
    throw std::invalid_argument("qbox_check requires mu(I) = 0 exactly");
  QBoxResult res;
  for (int d = 0; d <= depth_cap; ++d) {
    std::uint64_t first = I.index << d;
    for (std::uint64_t off = 0; off < (std::uint64_t(1) << d); ++off) {
      DyadicArc J(I.level + d, first + off);
      res.integral += detail::box_with_richardson(mu, J, quad, rel_target).value;
    }
  }
  res.ratio = res.integral * std::ldexp(1.0, I.level);
  return res;
}

}  // namespace blochlab
