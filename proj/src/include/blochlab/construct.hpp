#pragma once

#include "blochlab/dyadic.hpp"
#include "blochlab/majorant.hpp"
#include "blochlab/rational.hpp"
#include "blochlab/transform.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace blochlab {

namespace detail {

/// Exact test of w(2^-n)/2^-n >= bound for power majorants p/q:
/// 2^{n(q-p)} >= bound^q with integer arithmetic.
inline bool generation_threshold_met(const Majorant& w, int n, const Int& bound) {
  if (w.kind() == Majorant::Kind::power) {
    Int p = numerator(w.alpha()), q = denominator(w.alpha());
    if (p >= q) return false;  // w(t)/t bounded
    Int lhs = Int(1) << static_cast<unsigned>(Int(n * (q - p)).convert_to<long>());
    return lhs >= boost::multiprecision::pow(bound, static_cast<unsigned>(q.convert_to<long>()));
  }
  double t = std::ldexp(1.0, -n);
  return w.eval(t) / t >= bound.convert_to<double>();
}

}  // namespace detail

/// Minimal n with w(2^-n)/2^-n >= 6*2^l and n > min_exclusive.
inline int choose_generation(const Majorant& w, int l, int min_exclusive = 0) {
  if (l < 0) throw std::invalid_argument("generation index must be >= 0");
  // eligibility: w(t)/t must blow up along the grid
  {
    double a = w.eval(std::ldexp(1.0, -10)) * std::ldexp(1.0, 10);
    double b = w.eval(std::ldexp(1.0, -30)) * std::ldexp(1.0, 30);
    if (!(b > 4.0 * a) && !(b > 1e6)) throw std::runtime_error("majorant ineligible: w(t)/t is bounded on the grid");
  }
  Int bound = Int(6) << l;
  for (int n = std::max(min_exclusive + 1, 1); n <= DyadicArc::kMaxLevel; ++n)
    if (detail::generation_threshold_met(w, n, bound)) return n;
  throw std::runtime_error("generation level exceeds the depth cap");
}

struct NomocMeasure {
  DyadicMeasure measure;
  std::vector<int> generation_levels;  // n_1 < n_2 < ... < n_L (extended lazily beyond)
};

/// Measure spreading mass over every other dyadic arc of generation n_l
/// inside each generation-(l-1) arc, with mass 2^l * 2^{-n_l} per arc.
inline NomocMeasure build_nomoc(const Majorant& w, int L) {
  if (L < 1) throw std::invalid_argument("need L >= 1");
  w.check_structure();
  struct GenState {
    std::vector<int> levels;
    Majorant w;
    std::mutex mu;
  };
  auto state = std::make_shared<GenState>();
  state->w = w;
  for (int l = 1; l <= L; ++l)
    state->levels.push_back(choose_generation(w, l, state->levels.empty() ? 0 : state->levels.back()));
  std::vector<int> first_levels = state->levels;

  // At a generation level all mass goes to the even-position (left) child;
  // elsewhere mass splits evenly. Lazy extension keeps the rule pure.
  auto rule = [state](const DyadicArc& parent, const Rational& m) {
    if (m == 0) return std::make_pair(Rational(0), Rational(0));
    int child_level = parent.level + 1;
    bool is_generation;
    {
      std::lock_guard<std::mutex> lk(state->mu);
      while (state->levels.back() < child_level) {
        int l = int(state->levels.size()) + 1;
        state->levels.push_back(choose_generation(state->w, l, state->levels.back()));
      }
      is_generation = std::binary_search(state->levels.begin(), state->levels.end(), child_level);
    }
    if (is_generation) return std::make_pair(m, Rational(0));
    return std::make_pair(Rational(m / 2), Rational(m / 2));
  };
  return NomocMeasure{DyadicMeasure(1, rule), std::move(first_levels)};
}

struct MocBoundResult {
  bool pass = true;
  double worst_ratio = 0.0;  // max over dyadic arcs of mu(I)/w(|I|)
  DyadicArc worst_arc;
  DyadicArc failing_arc;
};

namespace detail {

/// Certified mu <= w(2^-n)/divisor: exact for power majorants, conservative
/// deflated double bound otherwise.
inline bool certified_le_w(const Rational& mu, int n, const Majorant& w, int divisor) {
  if (mu == 0) return true;
  Rational lhs = mu * divisor;
  if (w.kind() == Majorant::Kind::power) {
    // lhs <= 2^{-n p/q}  <=>  num^q * 2^{n p} <= den^q
    unsigned p = numerator(w.alpha()).convert_to<unsigned>();
    unsigned q = denominator(w.alpha()).convert_to<unsigned>();
    Int lq = boost::multiprecision::pow(numerator(lhs), q);
    Int rq = boost::multiprecision::pow(denominator(lhs), q);
    return (lq << (unsigned(n) * p)) <= rq;
  }
  double w_lb = w.eval(std::ldexp(1.0, -n)) * (1.0 - std::ldexp(1.0, -40));
  return to_double(lhs) <= w_lb;
}

}  // namespace detail

/// Checks mu(I) <= w(|I|) on every dyadic arc up to `depth`; from the level
/// n0 where w(2^-n0)/2^-n0 >= 6 onward, additionally mu(I) <= w(|I|)/3 and
/// the tripled-arc sum mu(I-)+mu(I)+mu(I+) <= w(|I|). The worst ratio
/// mu(I)/w(|I|) is reported over the levels where the /3 bound applies.
inline MocBoundResult verify_moc_bound(const DyadicMeasure& mu, const Majorant& w, int depth) {
  MocBoundResult res;
  int n0 = choose_generation(w, 0);
  std::vector<Rational> level_masses;
  for (int n = 0; n <= depth; ++n) {
    std::uint64_t count = std::uint64_t(1) << n;
    level_masses.assign(count, Rational(0));
    mu.enumerate(n, [&](const DyadicArc& I, const Rational& m) { level_masses[I.index] = m; });
    double w_n = w.eval(std::ldexp(1.0, -n));
    bool sharp = n >= n0;
    for (std::uint64_t k = 0; k < count; ++k) {
      const Rational& m = level_masses[k];
      bool ok = sharp ? detail::certified_le_w(m, n, w, 3) : detail::certified_le_w(m, n, w, 1);
      if (ok && sharp && n >= 1) {
        Rational triple = m + level_masses[(k + count - 1) % count] + level_masses[(k + 1) % count];
        ok = detail::certified_le_w(triple, n, w, 1);
      }
      if (!ok) {
        res.pass = false;
        res.failing_arc = DyadicArc(n, k);
        return res;
      }
      if (sharp) {
        double ratio = to_double(m) / w_n;
        if (ratio > res.worst_ratio) {
          res.worst_ratio = ratio;
          res.worst_arc = DyadicArc(n, k);
        }
      }
    }
  }
  return res;
}

struct NosuppMeasure {
  DyadicMeasure measure;
  /// coverings[k] = G_k; G_0 is the root arc. Each G_{k+1} arc is a maximal
  /// dyadic arc inside a G_k arc whose sibling's closed arc misses E.
  std::vector<std::vector<DyadicArc>> coverings;
};

/// Probability measure supported on E: mass splits evenly when both closed
/// children meet E, and goes entirely to the meeting child otherwise.
inline NosuppMeasure build_nosupp(const DyadicClosedSet& E, int depth) {
  if (depth > E.depth()) throw std::invalid_argument("closed set not defined to requested depth");
  if (E.has_full_generation())
    throw std::invalid_argument("closed set has a full generation (not measure zero)");
  auto Eptr = std::make_shared<DyadicClosedSet>(E);
  auto rule = [Eptr](const DyadicArc& parent, const Rational& m) {
    if (m == 0) return std::make_pair(Rational(0), Rational(0));
    int cn = parent.level + 1;
    if (cn > Eptr->depth())
      throw std::runtime_error("beyond authoritative depth: closed set undefined at level " +
                               std::to_string(cn));
    bool lm = Eptr->survives(cn, 2 * parent.index);
    bool rm = Eptr->survives(cn, 2 * parent.index + 1);
    if (lm && rm) return std::make_pair(Rational(m / 2), Rational(m / 2));
    if (lm) return std::make_pair(m, Rational(0));
    if (rm) return std::make_pair(Rational(0), m);
    throw std::logic_error("survivor arc with no surviving child");
  };
  NosuppMeasure out{DyadicMeasure(1, rule, E.depth()), {}};

  out.coverings.push_back({DyadicArc(0, 0)});
  while (true) {
    std::vector<DyadicArc> next;
    bool capped = false;
    for (const DyadicArc& I : out.coverings.back()) {
      // descend through both-surviving nodes; emit the surviving child of the
      // first node with exactly one surviving child
      std::vector<DyadicArc> stack{I};
      while (!stack.empty()) {
        DyadicArc P = stack.back();
        stack.pop_back();
        if (P.level + 1 > depth) {
          capped = true;
          continue;
        }
        bool lm = Eptr->survives(P.level + 1, 2 * P.index);
        bool rm = Eptr->survives(P.level + 1, 2 * P.index + 1);
        if (lm && rm) {
          stack.push_back(P.right_child());
          stack.push_back(P.left_child());
        } else {
          next.push_back(lm ? P.left_child() : P.right_child());
        }
      }
    }
    if (capped || next.empty()) break;
    std::sort(next.begin(), next.end());
    out.coverings.push_back(std::move(next));
  }
  return out;
}

/// Measure with nu(right child) = (1+eta) nu(J)/2 at every node.
inline DyadicMeasure build_riesz(const Rational& eta) {
  if (eta <= 0 || eta >= 1) throw std::invalid_argument("eta must lie in (0,1)");
  return DyadicMeasure(1, [eta](const DyadicArc&, const Rational& m) {
    return std::make_pair(Rational(m * (1 - eta) / 2), Rational(m * (1 + eta) / 2));
  });
}

struct ClarkPair {
  AnalyticFn b;  // self-map of the disc with (1+b)/(1-b) = H(nu)
  AnalyticFn f;  // 1 - Log(1-b), principal branch
};

/// Evaluators for the Clark-type Bloch function of a probability measure.
inline ClarkPair clark_function(const DyadicMeasure& nu, const EvalOptions& opt = {}) {
  if (nu.total_mass() != 1) throw std::invalid_argument("clark_function needs a probability measure");
  auto measure = std::make_shared<DyadicMeasure>(nu);
  EvalOptions o = opt;
  auto b = [measure, o](Complex z) {
    TransformValue H = herglotz(*measure, DiscPoint(z), o);
    Complex bv = (H.value - 1.0) / (H.value + 1.0);
    if (!(std::abs(bv) < 1.0 + H.error_bound))
      throw std::runtime_error("clark evaluator left the disc (uncertified transform?)");
    return bv;
  };
  auto f = [b](Complex z) { return 1.0 - std::log(1.0 - b(z)); };
  return ClarkPair{AnalyticFn(b), AnalyticFn(f)};
}

}  // namespace blochlab
