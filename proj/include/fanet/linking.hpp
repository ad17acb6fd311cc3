#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fanet/errors.hpp"
#include "fanet/geometry.hpp"
#include "fanet/hungarian.hpp"
#include "fanet/tubelet.hpp"

namespace fanet {

/// A long-term object tube: same-class detections with strictly increasing
/// frames. Frames are consecutive until merging introduces gaps.
/// final_score is assigned by rescore_tube; original per-entry scores are
/// kept alongside.
struct Tube {
  std::string id;
  std::string video_id;
  int class_id = 0;
  std::vector<Detection> entries;
  std::vector<double> original_scores;
  double final_score = 0.0;

  int first_frame() const { return entries.front().frame; }
  int last_frame() const { return entries.back().frame; }

  void check() const {
    if (entries.empty()) throw PreconditionError("tube '" + id + "' is empty");
    if (original_scores.size() != entries.size()) {
      throw InternalError("tube '" + id + "': original_scores out of sync");
    }
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (entries[k].class_id != class_id) {
        throw InternalError("tube '" + id + "': mixed classes");
      }
      if (k > 0 && entries[k].frame <= entries[k - 1].frame) {
        throw InternalError("tube '" + id + "': frames not increasing");
      }
    }
  }
};

struct LinkingConfig {
  double beta = 0.05;
  double alpha = 0.10;

  void check() const {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw ConfigError("beta outside [0,1]");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw ConfigError("alpha outside (0,1]");
    }
  }
};

/// Keeps exactly the detections with score >= beta, order preserved.
inline std::vector<Detection> filter_by_beta(const std::vector<Detection>& dets,
                                             double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw PreconditionError("filter_by_beta: beta outside [0,1]");
  }
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.score >= beta) kept.push_back(d);
  }
  return kept;
}

/// Pairwise linking affinity: p_a + p_b + IoU(a, b), in [0, 3].
inline double linking_score(const Detection& a, const Detection& b) {
  if (a.class_id != b.class_id) {
    throw PreconditionError("linking_score: class mismatch");
  }
  if (a.frame == b.frame) {
    throw PreconditionError("linking_score: same frame");
  }
  return a.score + b.score + iou(a.box, b.box);
}

/// Frame-indexed detection sets covering a contiguous frame range
/// [first_frame, first_frame + frames.size() - 1]. Frames with no detections
/// hold empty vectors.
struct FrameDetections {
  int first_frame = 0;
  std::vector<std::vector<Detection>> frames;
};

namespace detail {

struct DpCell {
  double best = 0.0;  // accumulated linking score of the best chain ending here
  int parent = -1;    // index in the previous frame, -1 = chain starts here
};

}  // namespace detail

/// Long-term tube creation. Iterates the ending frame from the last frame
/// down to the second; while that frame has unconsumed detections, extracts
/// the frame-consecutive chain ending there that maximizes the accumulated
/// linking score (dynamic programming over consecutive frames, one detection
/// per frame), removes its detections, and emits it as a tube. Leftover
/// first-frame detections become length-1 tubes. Ties: chain end by lower
/// detection index; predecessor by higher IoU with its successor, then lower
/// index.
inline std::vector<Tube> build_tubes(const FrameDetections& input,
                                     int class_id,
                                     const std::string& video_id = "",
                                     const std::string& id_prefix = "tube") {
  const auto& frames = input.frames;
  const int T = static_cast<int>(frames.size());
  for (int t = 0; t < T; ++t) {
    for (const auto& d : frames[t]) {
      if (d.class_id != class_id) {
        throw PreconditionError("build_tubes: detection of foreign class");
      }
      if (d.frame != input.first_frame + t) {
        throw PreconditionError("build_tubes: detection in wrong frame slot");
      }
    }
  }

  std::vector<std::vector<bool>> consumed(frames.size());
  for (int t = 0; t < T; ++t) consumed[t].assign(frames[t].size(), false);

  auto frame_live = [&](int t) {
    for (bool c : consumed[t]) {
      if (!c) return true;
    }
    return false;
  };

  std::vector<Tube> tubes;
  std::size_t next_id = 0;

  auto emit = [&](std::vector<std::pair<int, std::size_t>> chain) {
    Tube tube;
    tube.id = id_prefix + "_" + std::to_string(next_id++);
    tube.video_id = video_id;
    tube.class_id = class_id;
    for (const auto& [t, idx] : chain) {
      consumed[t][idx] = true;
      tube.entries.push_back(frames[t][idx]);
      tube.original_scores.push_back(frames[t][idx].score);
    }
    tubes.push_back(std::move(tube));
  };

  for (int end = T - 1; end >= 1; --end) {
    while (frame_live(end)) {
      // The chain can start no earlier than the frame after the last dead
      // frame; every accumulated term is non-negative, so the best chain
      // spans the whole live window.
      int start = end;
      while (start > 0 && frame_live(start - 1)) --start;

      std::vector<std::vector<detail::DpCell>> dp(end - start + 1);
      for (int t = start; t <= end; ++t) {
        const int rel = t - start;
        dp[rel].assign(frames[t].size(), detail::DpCell{});
        if (rel == 0) continue;
        for (std::size_t i = 0; i < frames[t].size(); ++i) {
          if (consumed[t][i]) continue;
          const Detection& cur = frames[t][i];
          detail::DpCell cell;
          double best_iou = -1.0;
          for (std::size_t p = 0; p < frames[t - 1].size(); ++p) {
            if (consumed[t - 1][p]) continue;
            const Detection& prev = frames[t - 1][p];
            const double cand = dp[rel - 1][p].best + linking_score(prev, cur);
            const double cand_iou = iou(prev.box, cur.box);
            const bool better =
                cand > cell.best || cell.parent < 0 ||
                (cand == cell.best &&
                 (cand_iou > best_iou ||
                  (cand_iou == best_iou &&
                   p < static_cast<std::size_t>(cell.parent))));
            if (better) {
              cell.best = cand;
              cell.parent = static_cast<int>(p);
              best_iou = cand_iou;
            }
          }
          dp[rel][i] = cell;
        }
      }

      // Best chain end at `end`: maximum accumulated score, tie by index.
      int best_end = -1;
      for (std::size_t i = 0; i < frames[end].size(); ++i) {
        if (consumed[end][i]) continue;
        if (best_end < 0 ||
            dp[end - start][i].best >
                dp[end - start][static_cast<std::size_t>(best_end)].best) {
          best_end = static_cast<int>(i);
        }
      }
      if (best_end < 0) break;  // unreachable: frame_live(end) was true

      std::vector<std::pair<int, std::size_t>> chain;
      int t = end;
      int idx = best_end;
      while (idx >= 0) {
        chain.emplace_back(t, static_cast<std::size_t>(idx));
        idx = dp[t - start][static_cast<std::size_t>(idx)].parent;
        --t;
      }
      std::reverse(chain.begin(), chain.end());
      emit(std::move(chain));
    }
  }

  if (T >= 1) {
    for (std::size_t i = 0; i < frames[0].size(); ++i) {
      if (!consumed[0][i]) emit({{0, i}});
    }
  }
  return tubes;
}

/// Accumulated linking score of a tube: the sum of linking scores between
/// consecutive entries (0 for a length-1 tube).
inline double tube_accumulated_score(const Tube& tube) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < tube.entries.size(); ++k) {
    acc += linking_score(tube.entries[k], tube.entries[k + 1]);
  }
  return acc;
}

/// Proposal-id -> tubelet lookup built from Tubelet.box_ids.
class TubeletIndex {
 public:
  TubeletIndex() = default;
  explicit TubeletIndex(const std::vector<Tubelet>& tubelets) {
    for (std::size_t ti = 0; ti < tubelets.size(); ++ti) {
      for (const auto& box_id : tubelets[ti].box_ids) {
        by_proposal_[box_id].push_back(ti);
      }
    }
  }

  /// Indices (into the construction vector) of tubelets containing any of
  /// the detection's source proposals, ascending and deduplicated.
  std::vector<std::size_t> tubelets_for(const Detection& d) const {
    std::vector<std::size_t> out;
    for (const auto& pid : d.source_proposal_ids) {
      const auto it = by_proposal_.find(pid);
      if (it == by_proposal_.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::unordered_map<std::string, std::vector<std::size_t>> by_proposal_;
};

/// True iff some proposal id of the detection appears among the tubelet's
/// box ids.
inline bool gamma(const Detection& d, const Tubelet& t) {
  for (const auto& pid : d.source_proposal_ids) {
    if (std::find(t.box_ids.begin(), t.box_ids.end(), pid) != t.box_ids.end()) {
      return true;
    }
  }
  return false;
}

/// Merge cost matrix: C[i][j] is the highest tubelet score over tubelets
/// associated with both the last detection of tube i and the first detection
/// of tube j, provided tube j starts strictly after tube i ends; 0 when no
/// tubelet qualifies. Diagonal is 0.
inline std::vector<std::vector<double>> merge_cost_matrix(
    const std::vector<Tube>& tubes, const std::vector<Tubelet>& tubelets,
    const TubeletIndex& index) {
  for (const auto& t : tubes) {
    t.check();
    if (t.class_id != tubes.front().class_id ||
        t.video_id != tubes.front().video_id) {
      throw PreconditionError("merge_cost_matrix: mixed class or video");
    }
  }
  const std::size_t n = tubes.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const Detection& tail = tubes[i].entries.back();
    const std::vector<std::size_t> tail_tubelets = index.tubelets_for(tail);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Detection& head = tubes[j].entries.front();
      if (head.frame <= tail.frame) continue;
      double best = 0.0;
      for (std::size_t ti : tail_tubelets) {
        if (!gamma(head, tubelets[ti])) continue;
        best = std::max(best, tubelet_score(tubelets[ti]));
      }
      cost[i][j] = best;
    }
  }
  return cost;
}

/// Second linking stage: assignment pairs become directed end->start edges,
/// edges are chained, and each chain is concatenated into one tube with gaps
/// at the bridged frames. Unmerged tubes pass through unchanged.
inline std::vector<Tube> merge_tubes(const std::vector<Tube>& tubes,
                                     const std::vector<Tubelet>& tubelets,
                                     const TubeletIndex& index) {
  if (tubes.empty()) return {};
  const std::vector<std::vector<double>> cost =
      merge_cost_matrix(tubes, tubelets, index);
  const Assignment assignment = solve_assignment(cost);

  std::vector<int> successor(tubes.size(), -1);
  std::vector<bool> has_predecessor(tubes.size(), false);
  for (const auto& [i, j] : assignment.pairs) {
    successor[i] = static_cast<int>(j);
    has_predecessor[j] = true;
  }

  std::vector<Tube> merged;
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    if (has_predecessor[i]) continue;  // emitted as part of its chain root
    Tube tube = tubes[i];
    int next = successor[i];
    while (next >= 0) {
      const Tube& frag = tubes[static_cast<std::size_t>(next)];
      if (frag.entries.front().frame <= tube.entries.back().frame) {
        throw InternalError("merge_tubes: temporal inconsistency in chain");
      }
      tube.entries.insert(tube.entries.end(), frag.entries.begin(),
                          frag.entries.end());
      tube.original_scores.insert(tube.original_scores.end(),
                                  frag.original_scores.begin(),
                                  frag.original_scores.end());
      next = successor[static_cast<std::size_t>(next)];
    }
    merged.push_back(std::move(tube));
  }
  return merged;
}

/// Tube rescoring: every entry's score becomes the mean of the
/// k = max(1, ceil(alpha * m)) highest scores in the tube. Original scores
/// are preserved; final_score records the mean.
inline Tube rescore_tube(const Tube& tube, double alpha) {
  if (tube.entries.empty()) {
    throw PreconditionError("rescore_tube: empty tube");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw PreconditionError("rescore_tube: alpha outside (0,1]");
  }
  tube.check();
  const std::size_t m = tube.entries.size();
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(m))));

  std::vector<double> sorted = tube.original_scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());

  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
  const double mean = sum / static_cast<double>(k);

  Tube out = tube;
  out.final_score = mean;
  for (auto& e : out.entries) e.score = mean;
  return out;
}

}  // namespace fanet
