#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fanet/errors.hpp"
#include "fanet/geometry.hpp"

namespace fanet {

/// A tubelet proposal: N linked per-frame boxes ending at end_frame, so it
/// covers frames [end_frame - N + 1, end_frame].
struct Tubelet {
  std::string id;
  std::string video_id;
  int end_frame = 0;
  std::vector<BBox> boxes;
  std::vector<double> box_scores;
  std::vector<std::string> box_ids;

  std::size_t length() const { return boxes.size(); }
  int start_frame() const {
    return end_frame - static_cast<int>(boxes.size()) + 1;
  }
  int frame_at(std::size_t k) const {
    return start_frame() + static_cast<int>(k);
  }

  void check() const {
    if (boxes.empty() || boxes.size() != box_scores.size() ||
        boxes.size() != box_ids.size()) {
      throw PreconditionError("tubelet '" + id +
                              "': boxes/scores/ids lengths disagree or empty");
    }
    for (const auto& b : boxes) check_box(b);
  }
};

/// Anchor-cuboid grid layout. anchors_per_cell = |scales| x |aspect_ratios|.
struct AnchorSpec {
  int grid_w = 1;
  int grid_h = 1;
  std::vector<double> scales = {128.0, 256.0, 512.0};
  std::vector<double> aspect_ratios = {0.5, 1.0, 2.0};  // w/h
  double stride = 16.0;

  int anchors_per_cell() const {
    return static_cast<int>(scales.size() * aspect_ratios.size());
  }
};

/// Generates W*H*k anchor cuboids of num_frames identical boxes each, ending
/// at end_frame, with box scores initialized to 0. Cell (i, j) is centered at
/// (stride*(i+0.5), stride*(j+0.5)); an anchor of scale s and ratio r=w/h has
/// width s*sqrt(r) and height s/sqrt(r).
inline std::vector<Tubelet> generate_anchor_cuboids(const AnchorSpec& spec,
                                                    int num_frames,
                                                    int end_frame = -1) {
  if (spec.grid_w < 1 || spec.grid_h < 1 || spec.scales.empty() ||
      spec.aspect_ratios.empty()) {
    throw PreconditionError("generate_anchor_cuboids: zero-dimension grid");
  }
  for (double s : spec.scales) {
    if (!(s > 0.0)) throw PreconditionError("anchor scale must be positive");
  }
  for (double r : spec.aspect_ratios) {
    if (!(r > 0.0)) throw PreconditionError("aspect ratio must be positive");
  }
  if (num_frames < 1) {
    throw PreconditionError("generate_anchor_cuboids: num_frames < 1");
  }
  if (end_frame < 0) end_frame = num_frames - 1;

  std::vector<Tubelet> cuboids;
  cuboids.reserve(static_cast<std::size_t>(spec.grid_w) * spec.grid_h *
                  spec.anchors_per_cell());
  for (int j = 0; j < spec.grid_h; ++j) {
    for (int i = 0; i < spec.grid_w; ++i) {
      const double cx = spec.stride * (i + 0.5);
      const double cy = spec.stride * (j + 0.5);
      int a = 0;
      for (double scale : spec.scales) {
        for (double ratio : spec.aspect_ratios) {
          const double w = scale * std::sqrt(ratio);
          const double h = scale / std::sqrt(ratio);
          const BBox box = box_from_center({cx, cy, w, h});
          Tubelet t;
          t.id = "anchor_" + std::to_string(i) + "_" + std::to_string(j) +
                 "_" + std::to_string(a);
          t.end_frame = end_frame;
          t.boxes.assign(static_cast<std::size_t>(num_frames), box);
          t.box_scores.assign(static_cast<std::size_t>(num_frames), 0.0);
          for (int f = 0; f < num_frames; ++f) {
            t.box_ids.push_back(t.id + "_f" + std::to_string(t.frame_at(f)));
          }
          cuboids.push_back(std::move(t));
          ++a;
        }
      }
    }
  }
  return cuboids;
}

/// Tubelet score: arithmetic mean of the per-box scores.
inline double tubelet_score(const Tubelet& t) {
  if (t.box_scores.empty()) {
    throw PreconditionError("tubelet_score: empty tubelet");
  }
  const double sum =
      std::accumulate(t.box_scores.begin(), t.box_scores.end(), 0.0);
  return sum / static_cast<double>(t.box_scores.size());
}

/// Tubelet overlap: mean over frames of the per-frame IoU. Both tubelets
/// must span the same frame range.
inline double tubelet_overlap(const Tubelet& a, const Tubelet& b) {
  if (a.length() != b.length() || a.end_frame != b.end_frame) {
    throw PreconditionError("tubelet_overlap: mismatched length or frames");
  }
  if (a.boxes.empty()) {
    throw PreconditionError("tubelet_overlap: empty tubelet");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.boxes.size(); ++k) {
    sum += iou(a.boxes[k], b.boxes[k]);
  }
  return sum / static_cast<double>(a.boxes.size());
}

/// Tubelet NMS over one (video, frame-range) group: greedy suppression in
/// descending tubelet_score order, ties broken by lower id. Survivors are
/// pairwise below the overlap threshold.
inline std::vector<Tubelet> tubelet_nms(const std::vector<Tubelet>& ts,
                                        double overlap_thresh) {
  if (!(overlap_thresh >= 0.0 && overlap_thresh <= 1.0)) {
    throw PreconditionError("tubelet_nms: threshold outside [0,1]");
  }
  for (const auto& t : ts) {
    t.check();
    if (t.length() != ts.front().length() ||
        t.end_frame != ts.front().end_frame) {
      throw PreconditionError("tubelet_nms: mixed-length input");
    }
  }

  std::vector<std::size_t> order(ts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> scores(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) scores[i] = tubelet_score(ts[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ts[a].id < ts[b].id;
  });

  std::vector<Tubelet> survivors;
  std::vector<bool> removed(ts.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (removed[i]) continue;
    survivors.push_back(ts[i]);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (removed[j]) continue;
      if (tubelet_overlap(ts[i], ts[j]) > overlap_thresh) removed[j] = true;
    }
  }
  return survivors;
}

/// Continuous FPN level value before flooring and clamping. Scaling all box
/// coordinates by s shifts this by exactly log2(s).
inline double pyramid_level_value(const BBox& b, int k0,
                                  double canonical_size) {
  check_box(b);
  const double area = b.area();
  if (area <= 0.0) return -std::numeric_limits<double>::infinity();
  return k0 + std::log2(std::sqrt(area) / canonical_size);
}

/// FPN level assignment: clamp(floor(k0 + log2(sqrt(area)/canonical)), ...).
/// Zero-area boxes map to min_level.
inline int assign_pyramid_level(const BBox& b, int k0, double canonical_size,
                                int min_level, int max_level) {
  const double value = pyramid_level_value(b, k0, canonical_size);
  if (!std::isfinite(value)) return min_level;
  const double floored = std::floor(value);
  return static_cast<int>(
      std::min<double>(max_level, std::max<double>(min_level, floored)));
}

}  // namespace fanet
