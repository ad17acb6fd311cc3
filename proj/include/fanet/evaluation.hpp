#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fanet/errors.hpp"
#include "fanet/geometry.hpp"

namespace fanet {

/// Ground-truth annotation for one frame of one track.
struct GroundTruthBox {
  std::string video_id;
  int frame = 0;
  int class_id = 0;
  BBox box;
  std::string track_id;
};

/// Flat detection instance as consumed by the evaluator.
struct EvalDetection {
  std::string video_id;
  int frame = 0;
  int class_id = 0;
  double score = 0.0;
  BBox box;
};

/// Greedy VOC-style matching for a single class: detections in descending
/// score order each match the highest-IoU unmatched ground truth with
/// IoU >= thresh in the same video and frame. Returns true/false-positive
/// labels in score order (ties keep input order).
inline std::vector<bool> match_detections(const std::vector<EvalDetection>& dets,
                                          const std::vector<GroundTruthBox>& gts,
                                          double iou_thresh) {
  if (dets.empty()) return {};
  for (const auto& d : dets) {
    if (d.class_id != dets.front().class_id) {
      throw PreconditionError("match_detections: mixed classes");
    }
  }

  std::map<std::pair<std::string, int>, std::vector<std::size_t>> gt_lookup;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gt_lookup[{gts[g].video_id, gts[g].frame}].push_back(g);
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });

  std::vector<bool> gt_matched(gts.size(), false);
  std::vector<bool> labels(dets.size(), false);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const EvalDetection& d = dets[order[rank]];
    const auto it = gt_lookup.find({d.video_id, d.frame});
    if (it == gt_lookup.end()) continue;
    double best_iou = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g : it->second) {
      if (gt_matched[g] || gts[g].class_id != d.class_id) continue;
      const double overlap = iou(d.box, gts[g].box);
      if (overlap >= iou_thresh && overlap > best_iou) {
        best_iou = overlap;
        best_gt = g;  // IoU ties keep the earlier ground truth
      }
    }
    if (best_gt < gts.size()) {
      gt_matched[best_gt] = true;
      labels[rank] = true;
    }
  }
  return labels;
}

/// Average precision from score-ordered TP/FP labels: area under the
/// all-point precision-recall curve with the monotone precision envelope.
inline double average_precision(const std::vector<bool>& labels,
                                std::size_t num_gt) {
  if (num_gt == 0) return 0.0;

  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k]) ++tp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }

  // Monotone envelope from the right.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

/// Unweighted mean over per-class APs.
inline double mean_ap(const std::vector<double>& per_class_ap) {
  if (per_class_ap.empty()) {
    throw PreconditionError("mean_ap: empty class set");
  }
  const double sum =
      std::accumulate(per_class_ap.begin(), per_class_ap.end(), 0.0);
  return sum / static_cast<double>(per_class_ap.size());
}

/// Per-class AP at one IoU threshold over the classes present in the ground
/// truth, ascending class id.
inline std::map<int, double> per_class_ap(const std::vector<EvalDetection>& dets,
                                          const std::vector<GroundTruthBox>& gts,
                                          double iou_thresh) {
  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.class_id);

  std::map<int, double> aps;
  for (int cls : classes) {
    std::vector<EvalDetection> cls_dets;
    std::vector<GroundTruthBox> cls_gts;
    for (const auto& d : dets) {
      if (d.class_id == cls) cls_dets.push_back(d);
    }
    for (const auto& g : gts) {
      if (g.class_id == cls) cls_gts.push_back(g);
    }
    const std::vector<bool> labels =
        match_detections(cls_dets, cls_gts, iou_thresh);
    aps[cls] = average_precision(labels, cls_gts.size());
  }
  return aps;
}

/// Mean AP at one IoU threshold.
inline double evaluate_map(const std::vector<EvalDetection>& dets,
                           const std::vector<GroundTruthBox>& gts,
                           double iou_thresh) {
  const std::map<int, double> aps = per_class_ap(dets, gts, iou_thresh);
  std::vector<double> values;
  values.reserve(aps.size());
  for (const auto& [cls, ap] : aps) values.push_back(ap);
  return mean_ap(values);
}

/// Mean AP averaged over IoU thresholds 0.50:0.05:0.95.
inline double ap_range(const std::vector<EvalDetection>& dets,
                       const std::vector<GroundTruthBox>& gts) {
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    sum += evaluate_map(dets, gts, 0.5 + 0.05 * i);
  }
  return sum / 10.0;
}

}  // namespace fanet
