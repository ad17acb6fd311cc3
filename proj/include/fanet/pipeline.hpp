#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fanet/errors.hpp"
#include "fanet/evaluation.hpp"
#include "fanet/geometry.hpp"
#include "fanet/linking.hpp"
#include "fanet/records.hpp"
#include "fanet/tubelet.hpp"

namespace fanet {

struct PipelineConfig {
  int tubelet_len = 6;         // N
  double beta = 0.05;          // confidence floor before linking
  double alpha = 0.10;         // top fraction for tube rescoring
  double rpn_nms_iou = 0.7;    // proposal-stage suppression threshold
  double final_nms_iou = 0.5;  // per-frame detection NMS threshold
  double tnms_iou = 0.7;       // tubelet NMS threshold
  double voting_iou = 0.5;     // box-voting inclusion threshold
  bool fuse_after_cascade = true;
  std::vector<double> eval_thresholds = {0.5};
  std::uint64_t seed = 0;

  // Ablation switches: linking covers the whole tube stage; merging and
  // rescoring toggle the second linking step and the score propagation.
  bool enable_linking = true;
  bool enable_merging = true;
  bool enable_rescoring = true;

  void check() const {
    if (tubelet_len < 1) throw ConfigError("tubelet_len must be >= 1");
    for (double v : {beta, rpn_nms_iou, final_nms_iou, tnms_iou, voting_iou}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError("threshold outside [0,1]");
      }
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw ConfigError("alpha outside (0,1]");
    }
    for (double t : eval_thresholds) {
      if (!(t >= 0.0 && t <= 1.0)) {
        throw ConfigError("evaluation threshold outside [0,1]");
      }
    }
  }
};

struct PipelineMetrics {
  std::map<double, double> map_by_threshold;
  double ap_range_050_095 = 0.0;
};

struct PipelineResult {
  std::vector<DetectionRecord> detections;
  std::vector<Tube> tubes;
  std::optional<PipelineMetrics> metrics;
};

namespace detail {

inline DetectionRecord detection_to_record(const std::string& video,
                                           const Detection& d) {
  DetectionRecord r;
  r.video = video;
  r.frame = d.frame;
  r.class_id = d.class_id;
  r.score = d.score;
  r.bbox = {d.box.x1, d.box.y1, d.box.x2, d.box.y2};
  if (!d.source_proposal_ids.empty()) {
    r.proposal = d.source_proposal_ids.front();
  }
  return r;
}

}  // namespace detail

/// Tubelet NMS applied per (video, frame-range) group; survivors returned
/// per video in deterministic order.
inline std::map<std::string, std::vector<Tubelet>> tnms_by_video(
    const std::vector<Tubelet>& tubelets, double overlap_thresh) {
  std::map<std::tuple<std::string, int, std::size_t>, std::vector<Tubelet>>
      groups;
  for (const auto& t : tubelets) {
    groups[{t.video_id, t.end_frame, t.length()}].push_back(t);
  }
  std::map<std::string, std::vector<Tubelet>> survivors;
  for (const auto& [key, group] : groups) {
    std::vector<Tubelet> kept = tubelet_nms(group, overlap_thresh);
    auto& dst = survivors[std::get<0>(key)];
    dst.insert(dst.end(), kept.begin(), kept.end());
  }
  return survivors;
}

/// The FANet post-processing chain over ingested detection and tubelet
/// records: per-(video, end-frame) T-NMS, per-(video, frame, class) NMS with
/// box voting, the beta confidence filter, then per-(video, class) tube
/// building, tubelet-guided merging, and rescoring. Detections carried by
/// tubes are re-emitted with their rescored scores.
inline PipelineResult run_pipeline(
    const std::vector<DetectionRecord>& detections,
    const std::vector<TubeletRecord>& tubelet_records,
    const PipelineConfig& config,
    const std::vector<GroundTruthRecord>& ground_truth = {}) {
  config.check();

  std::vector<Tubelet> tubelets;
  tubelets.reserve(tubelet_records.size());
  for (const auto& r : tubelet_records) {
    if (static_cast<int>(r.boxes.size()) != config.tubelet_len) {
      throw ConfigError("tubelet '" + r.id + "' has length " +
                        std::to_string(r.boxes.size()) +
                        ", configured N is " +
                        std::to_string(config.tubelet_len));
    }
    tubelets.push_back(to_tubelet(r));
  }

  const std::map<std::string, std::vector<Tubelet>> surviving_tubelets =
      tnms_by_video(tubelets, config.tnms_iou);

  // Per-frame, per-class NMS + voting with provenance, then the beta filter.
  std::map<std::tuple<std::string, int, int>, std::vector<Detection>> groups;
  for (const auto& r : detections) {
    groups[{r.video, r.frame, r.class_id}].push_back(to_detection(r));
  }

  std::map<std::pair<std::string, int>, std::vector<Detection>> by_video_class;
  for (const auto& [key, dets] : groups) {
    const NmsResult suppressed = nms(dets, config.final_nms_iou);
    std::vector<Detection> voted =
        bbox_voting(suppressed, dets, config.voting_iou);
    voted = filter_by_beta(voted, config.beta);
    auto& dst = by_video_class[{std::get<0>(key), std::get<2>(key)}];
    dst.insert(dst.end(), voted.begin(), voted.end());
  }

  PipelineResult result;

  if (!config.enable_linking) {
    for (const auto& [key, dets] : by_video_class) {
      for (const auto& d : dets) {
        result.detections.push_back(detail::detection_to_record(key.first, d));
      }
    }
  } else {
    static const std::vector<Tubelet> kNoTubelets;
    for (const auto& [key, dets] : by_video_class) {
      const std::string& video = key.first;
      const int class_id = key.second;
      if (dets.empty()) continue;

      int min_frame = dets.front().frame;
      int max_frame = dets.front().frame;
      for (const auto& d : dets) {
        min_frame = std::min(min_frame, d.frame);
        max_frame = std::max(max_frame, d.frame);
      }
      FrameDetections frame_sets;
      frame_sets.first_frame = min_frame;
      frame_sets.frames.resize(static_cast<std::size_t>(max_frame - min_frame) +
                               1);
      for (const auto& d : dets) {
        frame_sets.frames[static_cast<std::size_t>(d.frame - min_frame)]
            .push_back(d);
      }

      const std::string prefix =
          video + "_c" + std::to_string(class_id) + "_tube";
      std::vector<Tube> tubes =
          build_tubes(frame_sets, class_id, video, prefix);

      if (config.enable_merging) {
        const auto it = surviving_tubelets.find(video);
        const std::vector<Tubelet>& video_tubelets =
            it == surviving_tubelets.end() ? kNoTubelets : it->second;
        const TubeletIndex index(video_tubelets);
        tubes = merge_tubes(tubes, video_tubelets, index);
      }

      for (auto& tube : tubes) {
        if (config.enable_rescoring) tube = rescore_tube(tube, config.alpha);
        tube.check();
        for (const auto& entry : tube.entries) {
          result.detections.push_back(
              detail::detection_to_record(video, entry));
        }
        result.tubes.push_back(std::move(tube));
      }
    }
  }

  std::stable_sort(result.detections.begin(), result.detections.end(),
                   [](const DetectionRecord& a, const DetectionRecord& b) {
                     if (a.video != b.video) return a.video < b.video;
                     if (a.frame != b.frame) return a.frame < b.frame;
                     if (a.class_id != b.class_id) return a.class_id < b.class_id;
                     return a.score > b.score;
                   });

  if (!ground_truth.empty()) {
    std::vector<EvalDetection> eval_dets;
    eval_dets.reserve(result.detections.size());
    for (const auto& r : result.detections) {
      EvalDetection e;
      e.video_id = r.video;
      e.frame = r.frame;
      e.class_id = r.class_id;
      e.score = r.score;
      e.box = BBox{r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3]};
      eval_dets.push_back(std::move(e));
    }
    std::vector<GroundTruthBox> gts;
    gts.reserve(ground_truth.size());
    for (const auto& r : ground_truth) gts.push_back(to_ground_truth(r));

    PipelineMetrics metrics;
    for (double thresh : config.eval_thresholds) {
      metrics.map_by_threshold[thresh] = evaluate_map(eval_dets, gts, thresh);
    }
    metrics.ap_range_050_095 = ap_range(eval_dets, gts);
    result.metrics = metrics;
  }

  return result;
}

}  // namespace fanet
