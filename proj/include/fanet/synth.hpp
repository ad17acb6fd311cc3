#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fanet/errors.hpp"
#include "fanet/evaluation.hpp"
#include "fanet/geometry.hpp"
#include "fanet/rng.hpp"
#include "fanet/tubelet.hpp"

namespace fanet {

/// One synthetic ground-truth track: a constant-size box on a constant
/// velocity course with optional jitter, one box per frame of the scenario.
struct SynthTrack {
  std::string track_id;
  int class_id = 0;
  std::vector<BBox> boxes;  // index = frame
};

struct TrackParams {
  int image_w = 1280;
  int image_h = 720;
  int n_tracks = 4;
  int n_frames = 30;
  int n_classes = 3;
  double min_size = 40.0;
  double max_size = 120.0;
  double max_speed = 8.0;      // per-axis velocity range [-max_speed, max_speed]
  double motion_jitter = 0.0;  // per-frame Gaussian center jitter
};

struct DegradeParams {
  double loc_sigma = 0.0;    // detection box center jitter
  double p_miss = 0.0;       // per-box drop probability
  double fp_rate = 0.0;      // expected false positives per frame (Poisson)
  double p_confuse = 0.0;    // per-detection class confusion probability
  double tp_score_mu = 1.0;  // true-detection score distribution
  double tp_score_sigma = 0.0;
  double fp_score_mu = 0.3;  // false-positive score distribution
  double fp_score_sigma = 0.1;

  /// Values mirroring a plausibly noisy detector.
  static DegradeParams noisy() {
    DegradeParams p;
    p.loc_sigma = 1.5;
    p.p_miss = 0.1;
    p.fp_rate = 0.5;
    p.p_confuse = 0.05;
    p.tp_score_mu = 0.9;
    p.tp_score_sigma = 0.05;
    return p;
  }
};

struct TubeletParams {
  int length = 6;              // N
  double box_jitter = 0.0;     // proposal box center jitter vs the track
  double score_mu = 0.8;       // per-box proposal score distribution
  double score_sigma = 0.1;
};

/// Complete seeded scenario: tracks, their ground truth, degraded
/// detections, and RPN-style tubelet proposals derived from the tracks.
struct Scenario {
  std::uint64_t seed = 0;
  std::string video_id;
  int image_w = 0;
  int image_h = 0;
  int n_frames = 0;
  std::vector<SynthTrack> tracks;
  std::vector<Detection> detections;  // frame field set, flat list
  std::vector<Tubelet> tubelets;
  std::vector<GroundTruthBox> ground_truth;
};

/// Proposal identifier of the RPN box for a track at a frame. Shared between
/// the detection derived from that box and every tubelet window covering the
/// frame, which is what makes γ association work.
inline std::string proposal_id(const std::string& track_id, int frame) {
  return track_id + "_f" + std::to_string(frame);
}

inline std::vector<SynthTrack> generate_tracks(Rng& rng,
                                               const TrackParams& params) {
  if (params.n_frames < 1 || params.n_tracks < 0 || params.n_classes < 1) {
    throw PreconditionError("generate_tracks: bad frame/track/class counts");
  }
  std::vector<SynthTrack> tracks;
  for (int k = 0; k < params.n_tracks; ++k) {
    SynthTrack track;
    track.track_id = "trk" + std::to_string(k);
    track.class_id = rng.uniform_int(0, params.n_classes - 1);
    const double w = rng.uniform(params.min_size, params.max_size);
    const double h = rng.uniform(params.min_size, params.max_size);
    double cx = rng.uniform(0.5 * w, params.image_w - 0.5 * w);
    double cy = rng.uniform(0.5 * h, params.image_h - 0.5 * h);
    const double vx = rng.uniform(-params.max_speed, params.max_speed);
    const double vy = rng.uniform(-params.max_speed, params.max_speed);
    for (int t = 0; t < params.n_frames; ++t) {
      if (t > 0) {
        cx += vx;
        cy += vy;
        if (params.motion_jitter > 0.0) {
          cx += rng.normal(0.0, params.motion_jitter);
          cy += rng.normal(0.0, params.motion_jitter);
        }
      }
      // Clamp the center so the full box stays inside the image.
      cx = std::clamp(cx, 0.5 * w, params.image_w - 0.5 * w);
      cy = std::clamp(cy, 0.5 * h, params.image_h - 0.5 * h);
      track.boxes.push_back(box_from_center({cx, cy, w, h}));
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

/// Turns tracks into a degraded detection set: per-box dropout, center
/// jitter, class confusion, scored from the true-positive distribution, plus
/// Poisson background false positives scored from the false-positive
/// distribution.
inline std::vector<Detection> degrade(const std::vector<SynthTrack>& tracks,
                                      const DegradeParams& params, Rng& rng,
                                      int image_w, int image_h, int n_frames,
                                      int n_classes) {
  std::vector<Detection> dets;
  for (const auto& track : tracks) {
    for (int t = 0; t < static_cast<int>(track.boxes.size()); ++t) {
      if (rng.bernoulli(params.p_miss)) continue;
      BBox box = track.boxes[t];
      if (params.loc_sigma > 0.0) {
        const double dx = rng.normal(0.0, params.loc_sigma);
        const double dy = rng.normal(0.0, params.loc_sigma);
        box = BBox{box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy};
      }
      Detection d;
      d.box = box;
      d.frame = t;
      d.class_id = track.class_id;
      if (params.p_confuse > 0.0 && n_classes > 1 &&
          rng.bernoulli(params.p_confuse)) {
        const int shift = rng.uniform_int(1, n_classes - 1);
        d.class_id = (track.class_id + shift) % n_classes;
      }
      d.score = rng.clipped_normal(params.tp_score_mu, params.tp_score_sigma,
                                   0.0, 1.0);
      d.source_proposal_ids = {proposal_id(track.track_id, t)};
      dets.push_back(std::move(d));
    }
  }

  for (int t = 0; t < n_frames; ++t) {
    const int count = rng.poisson(params.fp_rate);
    for (int k = 0; k < count; ++k) {
      const double w = rng.uniform(20.0, 100.0);
      const double h = rng.uniform(20.0, 100.0);
      const double cx = rng.uniform(0.5 * w, image_w - 0.5 * w);
      const double cy = rng.uniform(0.5 * h, image_h - 0.5 * h);
      Detection d;
      d.box = box_from_center({cx, cy, w, h});
      d.frame = t;
      d.class_id = rng.uniform_int(0, n_classes - 1);
      d.score = rng.clipped_normal(params.fp_score_mu, params.fp_score_sigma,
                                   0.0, 1.0);
      d.source_proposal_ids = {"fp_" + std::to_string(t) + "_" +
                               std::to_string(k)};
      dets.push_back(std::move(d));
    }
  }
  return dets;
}

/// RPN-style tubelets: sliding windows of length N over each track's
/// (jittered) proposal boxes, covering dropped frames too. Window boxes use
/// the shared per-(track, frame) proposal ids, wiring them to the surviving
/// detections' source_proposal_ids.
inline std::vector<Tubelet> derive_tubelets(const std::vector<SynthTrack>& tracks,
                                            const TubeletParams& params,
                                            Rng& rng) {
  if (params.length < 1) {
    throw PreconditionError("derive_tubelets: tubelet length < 1");
  }
  std::vector<Tubelet> tubelets;
  for (const auto& track : tracks) {
    const int T = static_cast<int>(track.boxes.size());

    // One proposal box and score per frame, shared by all windows.
    std::vector<BBox> proposal_boxes;
    std::vector<double> proposal_scores;
    for (int t = 0; t < T; ++t) {
      BBox box = track.boxes[t];
      if (params.box_jitter > 0.0) {
        const double dx = rng.normal(0.0, params.box_jitter);
        const double dy = rng.normal(0.0, params.box_jitter);
        box = BBox{box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy};
      }
      proposal_boxes.push_back(box);
      proposal_scores.push_back(rng.clipped_normal(
          params.score_mu, params.score_sigma, 0.0, 1.0));
    }

    for (int end = params.length - 1; end < T; ++end) {
      Tubelet tub;
      tub.id = track.track_id + "_t" + std::to_string(end);
      tub.end_frame = end;
      for (int t = end - params.length + 1; t <= end; ++t) {
        tub.boxes.push_back(proposal_boxes[t]);
        tub.box_scores.push_back(proposal_scores[t]);
        tub.box_ids.push_back(proposal_id(track.track_id, t));
      }
      tubelets.push_back(std::move(tub));
    }
  }
  return tubelets;
}

struct ScenarioParams {
  std::uint64_t seed = 0;
  std::string video_id = "synth";
  TrackParams tracks;
  DegradeParams degrade;
  TubeletParams tubelets;
};

/// Generates a full scenario from one seed. The draw order (tracks, then
/// detections, then tubelets) is part of the determinism contract.
inline Scenario generate_scenario(const ScenarioParams& params) {
  Rng rng(params.seed);
  Scenario sc;
  sc.seed = params.seed;
  sc.video_id = params.video_id;
  sc.image_w = params.tracks.image_w;
  sc.image_h = params.tracks.image_h;
  sc.n_frames = params.tracks.n_frames;
  sc.tracks = generate_tracks(rng, params.tracks);
  sc.detections = degrade(sc.tracks, params.degrade, rng, sc.image_w,
                          sc.image_h, sc.n_frames, params.tracks.n_classes);
  sc.tubelets = derive_tubelets(sc.tracks, params.tubelets, rng);
  for (const auto& track : sc.tracks) {
    for (int t = 0; t < static_cast<int>(track.boxes.size()); ++t) {
      GroundTruthBox gt;
      gt.video_id = sc.video_id;
      gt.frame = t;
      gt.class_id = track.class_id;
      gt.box = track.boxes[t];
      gt.track_id = track.track_id;
      sc.ground_truth.push_back(std::move(gt));
    }
  }
  for (auto& tub : sc.tubelets) tub.video_id = sc.video_id;
  return sc;
}

}  // namespace fanet
