#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace blochlab {

enum class Verdict { converging, diverging, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converging: return "converging";
    case Verdict::diverging: return "diverging";
    default: return "inconclusive";
  }
}

/// Per-generation partial sums of a series/integral with a convergence verdict.
struct TailReport {
  struct Entry {
    int level = 0;
    double contribution = 0.0;
    double cumulative = 0.0;
    bool unreliable = false;
  };
  std::vector<Entry> per_level;
  Verdict verdict = Verdict::inconclusive;
  double tail_ratio = std::nan("");
  std::string note;

  double total() const { return per_level.empty() ? 0.0 : per_level.back().cumulative; }
};

/// Geometric fit over the last `window` contributions: converging iff the
/// fitted ratio is <= margin and no windowed level is flagged unreliable.
inline void finalize_tail_verdict(TailReport& r, double margin = 0.9, int window = 4) {
  if (int(r.per_level.size()) < window + 1) {
    r.verdict = Verdict::inconclusive;
    if (r.note.empty()) r.note = "too few levels for a tail fit";
    return;
  }
  double ratio_max = 0.0;
  bool clean = true;
  std::size_t n = r.per_level.size();
  for (std::size_t i = n - window; i < n; ++i) {
    double prev = r.per_level[i - 1].contribution;
    double cur = r.per_level[i].contribution;
    if (r.per_level[i].unreliable) clean = false;
    if (prev <= 0.0) {
      ratio_max = std::max(ratio_max, cur > 0.0 ? 2.0 : 0.0);
      continue;
    }
    ratio_max = std::max(ratio_max, cur / prev);
  }
  r.tail_ratio = ratio_max;
  if (ratio_max <= margin && clean)
    r.verdict = Verdict::converging;
  else if (ratio_max >= 1.0 - 1e-9)
    r.verdict = Verdict::diverging;
  else
    r.verdict = Verdict::inconclusive;
}

}  // namespace blochlab
