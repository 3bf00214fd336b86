#pragma once

#include "blochlab/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace blochlab {

/// Arc [k*2^-n, (k+1)*2^-n) of the circle normalized to total measure 1.
struct DyadicArc {
  int level = 0;
  std::uint64_t index = 0;

  static constexpr int kMaxLevel = 64;

  DyadicArc() = default;
  DyadicArc(int n, std::uint64_t k) : level(n), index(k) {
    if (n < 0 || n > kMaxLevel) throw std::invalid_argument("arc level out of range");
    if (n < 64 && k >= (std::uint64_t(1) << n)) throw std::invalid_argument("arc index out of range");
  }

  DyadicArc left_child() const { return DyadicArc(level + 1, 2 * index); }
  DyadicArc right_child() const { return DyadicArc(level + 1, 2 * index + 1); }
  DyadicArc parent() const {
    if (level == 0) throw std::logic_error("root arc has no parent");
    return DyadicArc(level - 1, index / 2);
  }

  Rational low() const { return Rational(Int(index), Int(1) << level); }
  Rational high() const { return Rational(Int(index) + 1, Int(1) << level); }
  Rational length() const { return pow2_inv(level); }
  Rational center() const { return Rational(2 * Int(index) + 1, Int(2) << level); }

  bool contains_arc(const DyadicArc& J) const {
    return J.level >= level && (J.index >> (J.level - level)) == index;
  }
  /// Closed-arc membership of a point theta in [0,1]; no wrap at the seam.
  bool closed_contains(const Rational& theta) const {
    return low() <= theta && theta <= high();
  }

  bool operator==(const DyadicArc& o) const = default;
  auto operator<=>(const DyadicArc& o) const = default;
};

struct Atom {
  Rational theta;
  Rational mass;
};

struct AtomList {
  std::vector<Atom> atoms;

  Rational total() const {
    Rational s = 0;
    for (const auto& a : atoms) s += a.mass;
    return s;
  }
};

/// Exactly consistent assignment of rational masses to dyadic arcs.
///
/// Rule-based measures derive child masses from a pure splitter applied
/// top-down; table-backed measures are authoritative to declared_depth and
/// refuse deeper queries unless a splitter extends them.
class DyadicMeasure {
 public:
  /// Maps (parent arc, parent mass) to (left child mass, right child mass).
  using Splitter =
      std::function<std::pair<Rational, Rational>(const DyadicArc&, const Rational&)>;

  DyadicMeasure(Rational total, Splitter rule, int declared_depth = DyadicArc::kMaxLevel)
      : total_mass_(std::move(total)),
        rule_(std::move(rule)),
        declared_depth_(declared_depth) {}

  /// Table-backed: entries at any levels; levels missing above the deepest
  /// provided entries are filled by child summation, existing entries are
  /// kept verbatim (so inconsistent tables stay inconsistent and detectable).
  DyadicMeasure(Rational total, std::map<std::pair<int, std::uint64_t>, Rational> table,
                int declared_depth, Splitter extension = nullptr)
      : total_mass_(std::move(total)),
        rule_(std::move(extension)),
        declared_depth_(declared_depth),
        table_(std::move(table)),
        table_backed_(true) {
    for (int n = declared_depth_ - 1; n >= 0; --n) {
      for (std::uint64_t k = 0; k < (std::uint64_t(1) << n); ++k) {
        auto key = std::make_pair(n, k);
        if (table_.count(key)) continue;
        Rational s = table_value(n + 1, 2 * k) + table_value(n + 1, 2 * k + 1);
        table_.emplace(key, std::move(s));
      }
    }
  }

  const Rational& total_mass() const { return total_mass_; }
  int declared_depth() const { return declared_depth_; }

  Rational mass(const DyadicArc& I) const {
    if (I.level == 0) return total_mass_;
    {
      std::lock_guard<std::mutex> lk(cache_->mu);
      auto it = cache_->memo.find({I.level, I.index});
      if (it != cache_->memo.end()) return it->second;
    }
    if (table_backed_ && I.level <= declared_depth_) {
      auto it = table_.find({I.level, I.index});
      return it == table_.end() ? Rational(0) : it->second;
    }
    Rational pm = mass(I.parent());
    auto [l, r] = split(I.parent(), pm);
    std::uint64_t li = I.index & ~std::uint64_t(1);
    std::lock_guard<std::mutex> lk(cache_->mu);
    cache_->memo.emplace(std::make_pair(I.level, li), l);
    cache_->memo.emplace(std::make_pair(I.level, li + 1), r);
    return (I.index == li) ? l : r;
  }

  /// Double-precision mass with its own memo; avoids repeated rational
  /// conversion on transform-evaluation hot paths.
  double mass_d(const DyadicArc& I) const {
    {
      std::lock_guard<std::mutex> lk(cache_->mu);
      auto it = cache_->memo_d.find({I.level, I.index});
      if (it != cache_->memo_d.end()) return it->second;
    }
    double v = to_double(mass(I));
    std::lock_guard<std::mutex> lk(cache_->mu);
    cache_->memo_d.emplace(std::make_pair(I.level, I.index), v);
    return v;
  }

  /// Streaming depth-first walk passing exact masses down; does not populate
  /// the memo cache (used for whole-level enumerations at large depths).
  void enumerate(int depth, const std::function<void(const DyadicArc&, const Rational&)>& visit,
                 bool leaves_only = true) const {
    walk(DyadicArc(0, 0), total_mass_, depth, visit, leaves_only);
  }

  struct Violation {
    DyadicArc parent;
    Rational parent_mass, child_sum;
  };

  std::vector<Violation> check_consistency(int depth) const {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    std::vector<Violation> out;
    check_walk(DyadicArc(0, 0), depth, out);
    return out;
  }

  AtomList to_atoms(int depth) const {
    AtomList out;
    out.atoms.reserve(std::size_t(1) << std::min(depth, 24));
    enumerate(depth, [&](const DyadicArc& I, const Rational& m) {
      if (m != 0) out.atoms.push_back({I.center(), m});
    });
    return out;
  }

 private:
  Rational table_value(int n, std::uint64_t k) const {
    auto it = table_.find({n, k});
    return it == table_.end() ? Rational(0) : it->second;
  }

  std::pair<Rational, Rational> split(const DyadicArc& parent, const Rational& pm) const {
    if (table_backed_ && parent.level < declared_depth_) {
      return {table_value(parent.level + 1, 2 * parent.index),
              table_value(parent.level + 1, 2 * parent.index + 1)};
    }
    if (parent.level >= declared_depth_ || !rule_)
      throw std::runtime_error("beyond authoritative depth: level " +
                               std::to_string(parent.level + 1));
    if (parent.level + 1 > DyadicArc::kMaxLevel)
      throw std::runtime_error("measure refinement exceeds depth cap");
    auto [l, r] = rule_(parent, pm);
    if (l < 0 || r < 0) throw std::runtime_error("measure rule produced negative mass");
    if (l + r != pm) throw std::runtime_error("measure rule is not conservative");
    return {l, r};
  }

  void walk(const DyadicArc& I, const Rational& m, int depth,
            const std::function<void(const DyadicArc&, const Rational&)>& visit,
            bool leaves_only) const {
    if (!leaves_only || I.level == depth) visit(I, m);
    if (I.level == depth) return;
    auto [l, r] = resolve_children(I, m);
    walk(I.left_child(), l, depth, visit, leaves_only);
    walk(I.right_child(), r, depth, visit, leaves_only);
  }

  std::pair<Rational, Rational> resolve_children(const DyadicArc& I, const Rational& m) const {
    if (table_backed_ && I.level < declared_depth_) {
      return {table_value(I.level + 1, 2 * I.index), table_value(I.level + 1, 2 * I.index + 1)};
    }
    return split(I, m);
  }

  void check_walk(const DyadicArc& I, int depth, std::vector<Violation>& out) const {
    if (I.level == depth) return;
    Rational m = (I.level == 0) ? total_mass_ : mass(I);
    Rational l = mass(I.left_child());
    Rational r = mass(I.right_child());
    if (l + r != m) out.push_back({I, m, l + r});
    check_walk(I.left_child(), depth, out);
    check_walk(I.right_child(), depth, out);
  }

  struct Cache {
    std::map<std::pair<int, std::uint64_t>, Rational> memo;
    std::map<std::pair<int, std::uint64_t>, double> memo_d;
    std::mutex mu;
  };

  Rational total_mass_;
  Splitter rule_;
  int declared_depth_;
  std::map<std::pair<int, std::uint64_t>, Rational> table_;
  bool table_backed_ = false;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Lebesgue (uniform) measure on the circle.
inline DyadicMeasure lebesgue_measure() {
  return DyadicMeasure(1, [](const DyadicArc&, const Rational& m) {
    return std::make_pair(Rational(m / 2), Rational(m / 2));
  });
}

/// Unit atom at theta in [0,1); mass goes to whichever half-open child
/// contains theta.
inline DyadicMeasure atom_measure(const Rational& theta, const Rational& total = 1) {
  return DyadicMeasure(total, [theta](const DyadicArc& I, const Rational& m) {
    if (m == 0) return std::make_pair(Rational(0), Rational(0));
    bool left = theta < I.left_child().high();
    return left ? std::make_pair(m, Rational(0)) : std::make_pair(Rational(0), m);
  });
}

/// Nested family of surviving closed dyadic arcs approximating a closed set E
/// of measure zero.
class DyadicClosedSet {
 public:
  DyadicClosedSet(std::vector<std::vector<std::uint64_t>> survivors)
      : survivors_(std::move(survivors)) {
    if (survivors_.empty() || survivors_[0] != std::vector<std::uint64_t>{0})
      throw std::invalid_argument("closed set must survive at the root");
    for (std::size_t n = 0; n < survivors_.size(); ++n) {
      auto& lv = survivors_[n];
      std::sort(lv.begin(), lv.end());
      lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
      if (lv.empty()) throw std::invalid_argument("closed set empty at generation " + std::to_string(n));
      if (n == 0) continue;
      for (auto k : lv)
        if (!survives(int(n) - 1, k / 2))
          throw std::invalid_argument("survivor set is not nested at generation " + std::to_string(n));
    }
  }

  static DyadicClosedSet from_predicate(const std::function<bool(const DyadicArc&)>& meets,
                                        int depth) {
    std::vector<std::vector<std::uint64_t>> sv(depth + 1);
    sv[0] = {0};
    for (int n = 1; n <= depth; ++n) {
      for (auto k : sv[n - 1]) {
        if (meets(DyadicArc(n, 2 * k))) sv[n].push_back(2 * k);
        if (meets(DyadicArc(n, 2 * k + 1))) sv[n].push_back(2 * k + 1);
      }
    }
    return DyadicClosedSet(std::move(sv));
  }

  /// Finite point set; closed-arc membership with no wrap at the 0/1 seam.
  static DyadicClosedSet from_points(const std::vector<Rational>& points, int depth) {
    return from_predicate(
        [&points](const DyadicArc& I) {
          return std::any_of(points.begin(), points.end(),
                             [&I](const Rational& p) { return I.closed_contains(p); });
        },
        depth);
  }

  int depth() const { return int(survivors_.size()) - 1; }
  const std::vector<std::uint64_t>& level(int n) const { return survivors_.at(n); }

  bool survives(int n, std::uint64_t k) const {
    const auto& lv = survivors_.at(n);
    return std::binary_search(lv.begin(), lv.end(), k);
  }

  /// True when the deepest known generation keeps every arc, so the
  /// measure-zero premise cannot be certified from this approximation.
  bool has_full_generation() const {
    int n = depth();
    if (n == 0) return true;
    if (n >= 63) return false;
    return survivors_.back().size() == (std::uint64_t(1) << n);
  }

 private:
  std::vector<std::vector<std::uint64_t>> survivors_;
};

/// Partition of the circle into dyadic arcs, finer near the radial
/// projection of z: every arc J satisfies
/// |J| <= ratio * max(1-|z|, angular distance from J to theta_z).
inline std::vector<DyadicArc> adaptive_leaves(double theta_z, double one_minus_r, double ratio,
                                              int max_depth = DyadicArc::kMaxLevel) {
  if (!(one_minus_r > 0) || !(ratio > 0) || !(ratio < 1))
    throw std::invalid_argument("adaptive_leaves: need 0 < 1-|z| and ratio in (0,1)");
  std::vector<DyadicArc> out;
  std::vector<DyadicArc> stack{DyadicArc(0, 0)};
  while (!stack.empty()) {
    DyadicArc I = stack.back();
    stack.pop_back();
    double len = std::ldexp(1.0, -I.level);
    double lo = double(I.index) * len, hi = lo + len;
    double d = 0.0;  // angular distance from the closed arc to theta_z, with wrap
    if (!(theta_z >= lo && theta_z <= hi)) {
      double d1 = std::min(std::abs(theta_z - lo), 1.0 - std::abs(theta_z - lo));
      double d2 = std::min(std::abs(theta_z - hi), 1.0 - std::abs(theta_z - hi));
      d = std::min(d1, d2);
    }
    if (len <= ratio * std::max(one_minus_r, d)) {
      out.push_back(I);
      continue;
    }
    if (I.level >= max_depth)
      throw std::runtime_error("adaptive_leaves: refinement of arc (" + std::to_string(I.level) +
                               "," + std::to_string(I.index) + ") would exceed the depth cap");
    stack.push_back(I.right_child());
    stack.push_back(I.left_child());
  }
  std::sort(out.begin(), out.end(), [](const DyadicArc& a, const DyadicArc& b) {
    return a.low() < b.low();
  });
  return out;
}

}  // namespace blochlab
