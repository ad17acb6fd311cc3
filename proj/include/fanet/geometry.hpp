#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fanet/errors.hpp"

namespace fanet {

/// Axis-aligned box, corner convention. Coordinates are continuous reals;
/// zero-area boxes are allowed, negative extents are not.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 <= x2 && y1 <= y2;
  }
};

inline void check_box(const BBox& b) {
  if (!b.valid()) {
    throw InvalidGeometryError("malformed box (" + std::to_string(b.x1) + "," +
                               std::to_string(b.y1) + "," +
                               std::to_string(b.x2) + "," +
                               std::to_string(b.y2) + ")");
  }
}

/// Center form {cx, cy, w, h} used at the ingestion boundary only.
struct CenterBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

inline BBox box_from_center(const CenterBox& c) {
  if (!(c.w >= 0.0) || !(c.h >= 0.0) || !std::isfinite(c.cx) ||
      !std::isfinite(c.cy) || !std::isfinite(c.w) || !std::isfinite(c.h)) {
    throw InvalidGeometryError("negative or non-finite center-form extent");
  }
  return BBox{c.cx - 0.5 * c.w, c.cy - 0.5 * c.h, c.cx + 0.5 * c.w,
              c.cy + 0.5 * c.h};
}

inline CenterBox box_to_center(const BBox& b) {
  check_box(b);
  return CenterBox{b.center_x(), b.center_y(), b.width(), b.height()};
}

/// Intersection over union in [0, 1]; 0 when the union has zero area.
inline double iou(const BBox& a, const BBox& b) {
  check_box(a);
  check_box(b);
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

/// A per-frame detection. source_proposal_ids carries the proposal identity
/// of this detection plus every proposal absorbed by NMS suppression; tube
/// merging consumes that provenance.
struct Detection {
  BBox box;
  int class_id = 0;
  double score = 0.0;
  int frame = 0;
  std::vector<std::string> source_proposal_ids;
};

/// Result of nms(): kept detections plus, per keeper, the indices (into the
/// original input) of the detections it suppressed.
struct NmsResult {
  std::vector<Detection> kept;
  std::vector<std::vector<std::size_t>> suppressed;
};

namespace detail {

inline void append_unique(std::vector<std::string>& dst,
                          const std::vector<std::string>& src) {
  for (const auto& id : src) {
    if (std::find(dst.begin(), dst.end(), id) == dst.end()) dst.push_back(id);
  }
}

}  // namespace detail

/// Greedy descending-score NMS over detections of one frame and one class.
/// Ties on score keep the lower input index. Every input detection is either
/// kept or recorded under exactly one keeper; keepers accumulate the
/// source_proposal_ids of their suppressed detections.
inline NmsResult nms(const std::vector<Detection>& dets, double iou_thresh) {
  if (!(iou_thresh >= 0.0 && iou_thresh <= 1.0)) {
    throw PreconditionError("nms: iou_thresh outside [0,1]");
  }
  for (const auto& d : dets) {
    check_box(d.box);
    if (d.frame != dets.front().frame || d.class_id != dets.front().class_id) {
      throw PreconditionError("nms: mixed frames or classes in input");
    }
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });

  NmsResult result;
  std::vector<bool> consumed(dets.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (consumed[i]) continue;
    consumed[i] = true;
    Detection keeper = dets[i];
    std::vector<std::size_t> absorbed;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (consumed[j]) continue;
      if (iou(dets[i].box, dets[j].box) > iou_thresh) {
        consumed[j] = true;
        absorbed.push_back(j);
        detail::append_unique(keeper.source_proposal_ids,
                              dets[j].source_proposal_ids);
      }
    }
    result.kept.push_back(std::move(keeper));
    result.suppressed.push_back(std::move(absorbed));
  }
  return result;
}

/// Bounding-box voting: each kept box becomes the score-weighted mean of the
/// corners of itself and its suppressed boxes with IoU >= voting_iou against
/// it. Scores and provenance stay untouched.
inline std::vector<Detection> bbox_voting(const NmsResult& nms_out,
                                          const std::vector<Detection>& all,
                                          double voting_iou) {
  if (nms_out.kept.size() != nms_out.suppressed.size()) {
    throw PreconditionError("bbox_voting: inconsistent suppression mapping");
  }
  std::vector<Detection> voted = nms_out.kept;
  for (std::size_t k = 0; k < voted.size(); ++k) {
    const BBox base = voted[k].box;
    std::vector<const Detection*> voters;
    for (std::size_t idx : nms_out.suppressed[k]) {
      if (idx >= all.size()) {
        throw PreconditionError("bbox_voting: suppression index out of range");
      }
      const Detection& s = all[idx];
      if (iou(base, s.box) >= voting_iou) voters.push_back(&s);
    }
    if (voters.empty()) continue;  // all weight on the keeper: exact identity

    double wsum = voted[k].score;
    double x1 = voted[k].score * base.x1;
    double y1 = voted[k].score * base.y1;
    double x2 = voted[k].score * base.x2;
    double y2 = voted[k].score * base.y2;
    for (const Detection* s : voters) {
      wsum += s->score;
      x1 += s->score * s->box.x1;
      y1 += s->score * s->box.y1;
      x2 += s->score * s->box.x2;
      y2 += s->score * s->box.y2;
    }
    if (wsum > 0.0) {
      voted[k].box = BBox{x1 / wsum, y1 / wsum, x2 / wsum, y2 / wsum};
    }
  }
  return voted;
}

}  // namespace fanet
