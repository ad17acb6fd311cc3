// Test-only reference implementations. Each one recomputes a result by brute
// force or direct definition, independently of the library's algorithmic
// path, so tests can assert exact agreement.
#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "fanet/feature.hpp"
#include "fanet/geometry.hpp"

namespace oracle {

/// Maximum accumulated linking score over all frame-consecutive chains of
/// unconsumed detections ending at frame index `end` (chains of length 1
/// score 0). Scores accumulate front-to-back exactly as the DP does, so
/// equality checks can be bitwise.
inline double best_chain_score(
    const std::vector<std::vector<fanet::Detection>>& frames,
    const std::vector<std::vector<bool>>& consumed, int end) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<const fanet::Detection*> chain;

  // Chains starting at frame `start`, extended forward to `end`.
  auto extend = [&](auto&& self, int t) -> void {
    if (t > end) {
      double acc = 0.0;
      for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        acc += chain[k]->score + chain[k + 1]->score +
               fanet::iou(chain[k]->box, chain[k + 1]->box);
      }
      best = std::max(best, acc);
      return;
    }
    for (std::size_t i = 0; i < frames[t].size(); ++i) {
      if (consumed[t][i]) continue;
      chain.push_back(&frames[t][i]);
      self(self, t + 1);
      chain.pop_back();
    }
  };

  for (int start = end; start >= 0; --start) {
    bool live = false;
    for (std::size_t i = 0; i < frames[start].size(); ++i) {
      if (!consumed[start][i]) {
        live = true;
        break;
      }
    }
    if (!live) break;  // chains cannot cross an empty frame
    chain.clear();
    extend(extend, start);
  }
  return best;
}

/// Maximum-total-score matching by exhaustive permutation search. Sums the
/// selected entries in ascending row order, mirroring how the solver reports
/// its total.
inline double best_assignment_total(
    const std::vector<std::vector<double>>& score) {
  const std::size_t rows = score.size();
  const std::size_t cols = rows == 0 ? 0 : score.front().size();
  if (rows == 0 || cols == 0) return 0.0;

  // Permute column choices over max(rows, cols) padded slots; slots beyond
  // the real columns mean "row unmatched".
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> slots(n);
  std::iota(slots.begin(), slots.end(), std::size_t{0});

  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (slots[i] < cols) total += score[i][slots[i]];
    }
    best = std::max(best, total);
  } while (std::next_permutation(slots.begin(), slots.end()));
  return best;
}

/// Elementwise maximum over per-frame pooled features, straight from the
/// definition (no interleaving step involved).
inline fanet::RoIFeature elementwise_max(
    const std::vector<fanet::RoIFeature>& maps) {
  fanet::RoIFeature out = maps.front();
  for (std::size_t t = 1; t < maps.size(); ++t) {
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      out.data[i] = std::max(out.data[i], maps[t].data[i]);
    }
  }
  return out;
}

}  // namespace oracle
