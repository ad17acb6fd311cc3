// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// Run with --cli <path-to-fanet-binary> so the determinism criterion can
// exercise the real executable.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fanet/fanet.hpp"
#include "oracle_helpers.hpp"

namespace fs = std::filesystem;
using namespace fanet;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", index,
              name, detail.empty() ? "" : " - ", detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::int64_t ulp_distance(double a, double b) {
  std::int64_t ia, ib;
  std::memcpy(&ia, &a, sizeof ia);
  std::memcpy(&ib, &b, sizeof ib);
  if (ia < 0) ia = std::numeric_limits<std::int64_t>::min() - ia;
  if (ib < 0) ib = std::numeric_limits<std::int64_t>::min() - ib;
  return ia > ib ? ia - ib : ib - ia;
}

// --- criterion 1: Viterbi optimality against exhaustive enumeration --------

void criterion_viterbi() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  int tubes_checked = 0;

  for (int instance = 0; instance < 200 && pass; ++instance) {
    Rng rng(9000 + static_cast<std::uint64_t>(instance));
    const int T = rng.uniform_int(1, 5);
    FrameDetections fd;
    fd.first_frame = 0;
    fd.frames.resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      const int n = rng.uniform_int(0, 4);
      for (int i = 0; i < n; ++i) {
        Detection d;
        const double x = 30.0 * rng.uniform_int(0, 2) + rng.uniform(-8.0, 8.0);
        d.box = BBox{x, 0.0, x + 25.0, 25.0};
        d.frame = t;
        d.class_id = 0;
        d.score = rng.uniform();
        d.source_proposal_ids = {"i" + std::to_string(instance) + "_" +
                                 std::to_string(t) + "_" + std::to_string(i)};
        fd.frames[static_cast<std::size_t>(t)].push_back(std::move(d));
      }
    }

    const std::vector<Tube> tubes = build_tubes(fd, 0, "v");
    std::vector<std::vector<bool>> consumed(fd.frames.size());
    for (std::size_t t = 0; t < fd.frames.size(); ++t) {
      consumed[t].assign(fd.frames[t].size(), false);
    }
    for (const Tube& tube : tubes) {
      const double expected =
          oracle::best_chain_score(fd.frames, consumed, tube.last_frame());
      const double got = tube_accumulated_score(tube);
      if (got != expected) {  // bitwise equality on the same arithmetic
        pass = false;
        detail = "instance " + std::to_string(instance) + ": got " +
                 std::to_string(got) + ", oracle " + std::to_string(expected);
        break;
      }
      ++tubes_checked;
      for (const auto& e : tube.entries) {
        for (std::size_t i = 0; i < fd.frames[e.frame].size(); ++i) {
          if (fd.frames[e.frame][i].source_proposal_ids ==
              e.source_proposal_ids) {
            consumed[e.frame][i] = true;
          }
        }
      }
    }
  }

  const double elapsed = seconds_since(start);
  if (pass && elapsed >= 10.0) {
    pass = false;
    detail = "too slow: " + std::to_string(elapsed) + " s";
  }
  if (pass) {
    detail = "200 instances, " + std::to_string(tubes_checked) +
             " extracted tubes exact, " + std::to_string(elapsed) + " s";
  }
  report(1, "Viterbi tube extraction matches exhaustive enumeration", pass,
         detail);
}

// --- criterion 2: Hungarian optimality --------------------------------------

void criterion_hungarian() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  for (int trial = 0; trial < 500 && pass; ++trial) {
    Rng rng(11000 + static_cast<std::uint64_t>(trial));
    const int rows = rng.uniform_int(1, 6);
    const int cols = rng.uniform_int(1, 6);
    std::vector<std::vector<double>> score(
        static_cast<std::size_t>(rows),
        std::vector<double>(static_cast<std::size_t>(cols)));
    for (auto& row : score) {
      for (double& v : row) v = rng.bernoulli(0.15) ? 0.0 : rng.uniform();
    }
    const Assignment got = solve_assignment(score);
    const double expected = oracle::best_assignment_total(score);
    if (got.total != expected) {
      pass = false;
      detail = "trial " + std::to_string(trial) + ": got " +
               std::to_string(got.total) + ", brute force " +
               std::to_string(expected);
    }
  }

  const double elapsed = seconds_since(start);
  if (pass && elapsed >= 5.0) {
    pass = false;
    detail = "too slow: " + std::to_string(elapsed) + " s";
  }
  if (pass) detail = "500 matrices exact, " + std::to_string(elapsed) + " s";
  report(2, "Hungarian assignment matches brute-force permutation optimum",
         pass, detail);
}

// --- criterion 3: temporal pooling shape and oracle equivalence -------------

void criterion_temporal_pooling() {
  bool pass = true;
  std::string detail;
  Rng rng(12000);

  for (int n = 1; n <= 10 && pass; ++n) {
    for (int input = 0; input < 100 && pass; ++input) {
      std::vector<RoIFeature> frames;
      frames.reserve(static_cast<std::size_t>(n));
      for (int t = 0; t < n; ++t) {
        RoIFeature f(7, 7, 256);
        for (double& v : f.data) v = rng.uniform(-10.0, 10.0);
        frames.push_back(std::move(f));
      }
      const RoIFeature pooled = temporal_pool(concat_interleave(frames), n);
      if (pooled.h != 7 || pooled.w != 7 || pooled.channels != 256) {
        pass = false;
        detail = "shape broke at N=" + std::to_string(n);
        break;
      }
      const RoIFeature reference = oracle::elementwise_max(frames);
      if (pooled.data != reference.data) {
        pass = false;
        detail = "value mismatch at N=" + std::to_string(n);
      }
    }
  }
  if (pass) detail = "7x7x256 for N in [1,10], 100 inputs per N, exact";
  report(3, "temporal pooling is fixed-size and equals the max reference",
         pass, detail);
}

// --- criterion 4: fusion algebra --------------------------------------------

void criterion_fusion() {
  bool pass = true;
  std::string detail;
  Rng rng(13000);
  std::int64_t max_sym_ulp = 0;

  for (int i = 0; i < 1000000 && pass; ++i) {
    const double spt = rng.uniform();
    const double tmp = rng.uniform();
    const double fused = fuse_scores({spt}, {tmp})[0];
    if (!(fused >= 0.0 && fused <= 1.0) || fused < spt || fused < tmp) {
      pass = false;
      detail = "range/dominance broke at (" + std::to_string(spt) + ", " +
               std::to_string(tmp) + ")";
      break;
    }
    const double direct = tmp + spt * (1.0 - tmp);
    if (ulp_distance(fused, direct) > 1) {
      pass = false;
      detail = "direct evaluation differs by more than 1 ulp";
      break;
    }
    const double swapped = fuse_scores({tmp}, {spt})[0];
    const std::int64_t d = ulp_distance(fused, swapped);
    max_sym_ulp = std::max(max_sym_ulp, d);
    if (d > 1) {
      pass = false;
      detail = "symmetry differs by " + std::to_string(d) + " ulp at (" +
               std::to_string(spt) + ", " + std::to_string(tmp) + ")";
    }
  }
  if (pass) {
    detail = "1e6 pairs in range, >= both inputs, symmetric within " +
             std::to_string(max_sym_ulp) + " ulp, direct match exact";
  }
  report(4, "double-head fusion algebra", pass, detail);
}

// --- criterion 5: T-NMS admissibility and permutation invariance ------------

void criterion_tnms() {
  bool pass = true;
  std::string detail;

  for (int trial = 0; trial < 200 && pass; ++trial) {
    Rng rng(14000 + static_cast<std::uint64_t>(trial));
    std::vector<Tubelet> ts;
    const int n = rng.uniform_int(1, 15);
    for (int i = 0; i < n; ++i) {
      Tubelet t;
      t.id = "t" + std::to_string(i);
      t.end_frame = 3;
      const double x = rng.uniform(0.0, 60.0);
      const double y = rng.uniform(0.0, 60.0);
      for (int k = 0; k < 4; ++k) {
        const double dx = rng.uniform(-3.0, 3.0);
        const double dy = rng.uniform(-3.0, 3.0);
        t.boxes.push_back(BBox{x + dx, y + dy, x + dx + 15.0, y + dy + 15.0});
        t.box_scores.push_back(rng.uniform());
        t.box_ids.push_back(t.id + "_b" + std::to_string(k));
      }
      ts.push_back(std::move(t));
    }
    const double thresh = rng.uniform(0.2, 0.8);

    const std::vector<Tubelet> kept = tubelet_nms(ts, thresh);
    for (std::size_t i = 0; i < kept.size() && pass; ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        if (tubelet_overlap(kept[i], kept[j]) > thresh) {
          pass = false;
          detail = "kept pair exceeds threshold in trial " +
                   std::to_string(trial);
          break;
        }
      }
    }
    if (!pass) break;

    std::vector<Tubelet> shuffled = ts;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      const auto j =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(shuffled[i - 1], shuffled[j]);
    }
    const std::vector<Tubelet> kept2 = tubelet_nms(shuffled, thresh);
    std::set<std::string> ids1, ids2;
    for (const auto& t : kept) ids1.insert(t.id);
    for (const auto& t : kept2) ids2.insert(t.id);
    if (ids1 != ids2) {
      pass = false;
      detail = "survivor set changed under permutation in trial " +
               std::to_string(trial);
    }
  }
  if (pass) detail = "200 random sets admissible and permutation-invariant";
  report(5, "tubelet NMS admissibility", pass, detail);
}

// --- criterion 6: AP fixtures and rank invariance ----------------------------

void criterion_ap() {
  bool pass = true;
  std::string detail;

  if (average_precision({true}, 1) != 1.0 ||
      average_precision({true, false}, 1) != 1.0 ||
      average_precision({false, true}, 1) != 0.5) {
    pass = false;
    detail = "hand-derived fixture mismatch";
  }

  for (int trial = 0; trial < 100 && pass; ++trial) {
    Rng rng(15000 + static_cast<std::uint64_t>(trial));
    std::vector<EvalDetection> dets;
    std::vector<GroundTruthBox> gts;
    const int frames = rng.uniform_int(1, 6);
    for (int f = 0; f < frames; ++f) {
      GroundTruthBox g;
      g.video_id = "v";
      g.frame = f;
      g.class_id = 0;
      g.box = BBox{0, 0, 10, 10};
      g.track_id = "t";
      gts.push_back(g);
      const int n = rng.uniform_int(0, 4);
      for (int i = 0; i < n; ++i) {
        EvalDetection d;
        d.video_id = "v";
        d.frame = f;
        d.class_id = 0;
        d.score = rng.uniform(0.05, 0.95);
        const double x = rng.bernoulli(0.5) ? rng.uniform(0.0, 3.0) : 40.0;
        d.box = BBox{x, 0, x + 10, 10};
        dets.push_back(std::move(d));
      }
    }
    const double base =
        average_precision(match_detections(dets, gts, 0.5), gts.size());

    std::vector<EvalDetection> rescaled = dets;
    for (auto& d : rescaled) d.score = 0.2 + 0.7 * d.score * d.score;
    const double after =
        average_precision(match_detections(rescaled, gts, 0.5), gts.size());
    if (base != after) {
      pass = false;
      detail = "AP changed under monotone rescaling in trial " +
               std::to_string(trial);
    }
  }
  if (pass) detail = "fixtures exact, rank-invariance on 100 cases";
  report(6, "average precision fixtures and monotone-rescale invariance", pass,
         detail);
}

// --- criterion 7: fragment recovery -----------------------------------------

void criterion_fragment_recovery() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  // Ten tracks, one object category each (linking runs per category), 10%
  // dropout, N = 6.
  TrackParams tparams;
  tparams.n_tracks = 10;
  tparams.n_frames = 40;
  tparams.n_classes = 1;
  tparams.image_w = 4000;
  tparams.image_h = 2000;
  DegradeParams dparams;
  dparams.p_miss = 0.1;
  dparams.tp_score_mu = 0.9;
  dparams.tp_score_sigma = 0.05;
  TubeletParams tubparams;
  tubparams.length = 6;

  Rng rng(4207);
  std::vector<SynthTrack> tracks = generate_tracks(rng, tparams);
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    tracks[k].class_id = static_cast<int>(k);
  }
  const std::vector<Detection> all_dets =
      degrade(tracks, dparams, rng, tparams.image_w, tparams.image_h,
              tparams.n_frames, tparams.n_tracks);
  std::vector<Tubelet> tubelets = derive_tubelets(tracks, tubparams, rng);

  std::vector<Tube> fragments;
  for (int cls = 0; cls < tparams.n_tracks; ++cls) {
    FrameDetections fd;
    fd.first_frame = 0;
    fd.frames.resize(static_cast<std::size_t>(tparams.n_frames));
    for (const auto& d : filter_by_beta(all_dets, 0.05)) {
      if (d.class_id == cls) {
        fd.frames[static_cast<std::size_t>(d.frame)].push_back(d);
      }
    }
    const std::vector<Tube> cls_tubes =
        build_tubes(fd, cls, "v", "c" + std::to_string(cls));
    fragments.insert(fragments.end(), cls_tubes.begin(), cls_tubes.end());
  }

  const TubeletIndex index(tubelets);
  std::vector<Tube> merged;
  for (int cls = 0; cls < tparams.n_tracks; ++cls) {
    std::vector<Tube> cls_fragments;
    for (const auto& f : fragments) {
      if (f.class_id == cls) cls_fragments.push_back(f);
    }
    const std::vector<Tube> cls_merged =
        merge_tubes(cls_fragments, tubelets, index);
    merged.insert(merged.end(), cls_merged.begin(), cls_merged.end());
  }

  // Independent qualification predicate: same-class tubes i, j qualify when
  // j starts strictly after i ends and some tubelet holds proposals of both
  // endpoints.
  auto shares_tubelet = [&](const Detection& a, const Detection& b) {
    for (const auto& tub : tubelets) {
      bool has_a = false, has_b = false;
      for (const auto& pid : a.source_proposal_ids) {
        for (const auto& bid : tub.box_ids) has_a = has_a || pid == bid;
      }
      for (const auto& pid : b.source_proposal_ids) {
        for (const auto& bid : tub.box_ids) has_b = has_b || pid == bid;
      }
      if (has_a && has_b) return true;
    }
    return false;
  };

  std::size_t qualifying_pairs = 0;
  std::map<std::string, std::size_t> merged_owner;  // entry pid -> merged tube
  for (std::size_t m = 0; m < merged.size(); ++m) {
    for (const auto& e : merged[m].entries) {
      merged_owner[e.source_proposal_ids.front()] = m;
    }
  }
  for (std::size_t i = 0; i < fragments.size() && pass; ++i) {
    for (std::size_t j = 0; j < fragments.size(); ++j) {
      if (i == j || fragments[i].class_id != fragments[j].class_id) continue;
      const Detection& tail = fragments[i].entries.back();
      const Detection& head = fragments[j].entries.front();
      if (head.frame <= tail.frame) continue;
      if (!shares_tubelet(tail, head)) continue;
      ++qualifying_pairs;
      const std::size_t owner_i =
          merged_owner.at(fragments[i].entries.front().source_proposal_ids.front());
      const std::size_t owner_j =
          merged_owner.at(head.source_proposal_ids.front());
      if (owner_i != owner_j) {
        pass = false;
        detail = "qualifying fragments " + std::to_string(i) + " and " +
                 std::to_string(j) + " were not merged together";
        break;
      }
    }
  }

  if (pass && qualifying_pairs == 0) {
    pass = false;
    detail = "scenario produced no qualifying fragment pairs to exercise";
  }
  if (pass && merged.size() >= fragments.size()) {
    pass = false;
    detail = "merge did not reduce the fragment count";
  }

  const double elapsed = seconds_since(start);
  if (pass && elapsed >= 5.0) {
    pass = false;
    detail = "too slow: " + std::to_string(elapsed) + " s";
  }
  if (pass) {
    detail = std::to_string(fragments.size()) + " fragments -> " +
             std::to_string(merged.size()) + " tubes, " +
             std::to_string(qualifying_pairs) + " qualifying pairs all merged, " +
             std::to_string(elapsed) + " s";
  }
  report(7, "tubelet-guided fragment recovery", pass, detail);
}

// --- criterion 8: ablation direction -----------------------------------------

void criterion_ablation() {
  bool pass = true;
  std::string detail;
  std::string gains;

  for (std::uint64_t seed = 1; seed <= 5 && pass; ++seed) {
    ScenarioParams params;
    params.seed = seed;
    params.tracks.n_tracks = 8;
    params.tracks.n_frames = 40;
    params.tracks.n_classes = 3;
    params.tracks.image_w = 3000;
    params.tracks.image_h = 1500;
    params.degrade.p_miss = 0.10;
    params.degrade.p_confuse = 0.05;
    params.degrade.tp_score_mu = 0.8;
    params.degrade.tp_score_sigma = 0.15;  // score noise
    params.degrade.fp_rate = 0.0;
    params.tubelets.length = 6;
    const Scenario sc = generate_scenario(params);

    std::vector<DetectionRecord> det_records;
    for (const auto& d : sc.detections) {
      DetectionRecord r;
      r.video = sc.video_id;
      r.frame = d.frame;
      r.class_id = d.class_id;
      r.score = d.score;
      r.bbox = {d.box.x1, d.box.y1, d.box.x2, d.box.y2};
      r.proposal = d.source_proposal_ids.front();
      det_records.push_back(std::move(r));
    }
    std::vector<TubeletRecord> tub_records;
    for (const auto& t : sc.tubelets) tub_records.push_back(to_record(t));
    std::vector<GroundTruthRecord> gt_records;
    for (const auto& g : sc.ground_truth) gt_records.push_back(to_record(g));

    PipelineConfig with_linking;
    with_linking.tubelet_len = 6;
    PipelineConfig without_linking = with_linking;
    without_linking.enable_linking = false;

    const auto on =
        run_pipeline(det_records, tub_records, with_linking, gt_records);
    const auto off =
        run_pipeline(det_records, tub_records, without_linking, gt_records);
    const double map_on = on.metrics->map_by_threshold.at(0.5);
    const double map_off = off.metrics->map_by_threshold.at(0.5);
    gains += (gains.empty() ? "" : ", ") + std::to_string(map_on - map_off);
    if (!(map_on > map_off)) {
      pass = false;
      detail = "seed " + std::to_string(seed) + ": linking " +
               std::to_string(map_on) + " <= baseline " +
               std::to_string(map_off);
    }
  }
  if (pass) detail = "mAP@0.5 gains across 5 seeds: " + gains;
  report(8, "linking + rescoring improves mAP on degraded scenarios", pass,
         detail);
}

// --- criterion 9: byte-identical pipeline runs -------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism(const std::string& cli) {
  bool pass = true;
  std::string detail;

  if (cli.empty()) {
    report(9, "pipeline determinism", false, "no --cli path given");
    return;
  }

  const fs::path work =
      fs::temp_directory_path() /
      ("fanet_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };

  const std::string scenario = (work / "scenario").string();
  int rc = run("synth --seed 2024 --tracks 8 --frames 30 --classes 3"
               " --p-miss 0.1 --p-confuse 0.05 --score-mu 0.85"
               " --score-sigma 0.1 --fp-rate 0.5 --loc-sigma 1.0"
               " --tubelet-len 6 --out-dir " + scenario);
  if (rc != 0) {
    report(9, "pipeline determinism", false, "synth run failed");
    fs::remove_all(work);
    return;
  }

  const std::string base_args = "pipeline --detections " + scenario +
                                "/detections.jsonl --tubelets " + scenario +
                                "/tubelets.jsonl --gt " + scenario +
                                "/groundtruth.jsonl --tubelet-len 6 --out-dir ";
  const std::string out1 = (work / "run1").string();
  const std::string out2 = (work / "run2").string();
  if (run(base_args + out1) != 0 || run(base_args + out2) != 0) {
    report(9, "pipeline determinism", false, "pipeline run failed");
    fs::remove_all(work);
    return;
  }

  for (const char* name : {"detections.jsonl", "tubes.jsonl", "metrics.json"}) {
    const std::string a = slurp(fs::path(out1) / name);
    const std::string b = slurp(fs::path(out2) / name);
    if (a.empty() || a != b) {
      pass = false;
      detail = std::string(name) + " differs between runs or is empty";
      break;
    }
  }
  if (pass) detail = "detections, tubes, and metrics byte-identical";
  fs::remove_all(work);
  report(9, "pipeline determinism", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }

  criterion_viterbi();
  criterion_hungarian();
  criterion_temporal_pooling();
  criterion_fusion();
  criterion_tnms();
  criterion_ap();
  criterion_fragment_recovery();
  criterion_ablation();
  criterion_determinism(cli);

  if (g_failures == 0) {
    std::printf("all 9 acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
