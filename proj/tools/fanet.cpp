// fanet command-line front end: synthetic scenario generation, tubelet NMS,
// long-term linking, temporal-pooling demo, evaluation, and the full
// post-processing pipeline over JSON-Lines files.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fanet/fanet.hpp"

namespace fs = std::filesystem;
using fanet::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIngest = 3;
constexpr int kExitInternal = 4;

fanet::PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fanet::ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw fanet::ConfigError("bad config JSON in " + path + ": " + e.what());
  }
  fanet::PipelineConfig cfg;
  try {
    if (j.contains("tubelet_len")) cfg.tubelet_len = j["tubelet_len"].get<int>();
    if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("rpn_nms_iou")) cfg.rpn_nms_iou = j["rpn_nms_iou"].get<double>();
    if (j.contains("final_nms_iou")) cfg.final_nms_iou = j["final_nms_iou"].get<double>();
    if (j.contains("tnms_iou")) cfg.tnms_iou = j["tnms_iou"].get<double>();
    if (j.contains("voting_iou")) cfg.voting_iou = j["voting_iou"].get<double>();
    if (j.contains("fuse_after_cascade")) cfg.fuse_after_cascade = j["fuse_after_cascade"].get<bool>();
    if (j.contains("eval_thresholds")) cfg.eval_thresholds = j["eval_thresholds"].get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("enable_linking")) cfg.enable_linking = j["enable_linking"].get<bool>();
    if (j.contains("enable_merging")) cfg.enable_merging = j["enable_merging"].get<bool>();
    if (j.contains("enable_rescoring")) cfg.enable_rescoring = j["enable_rescoring"].get<bool>();
  } catch (const json::exception& e) {
    throw fanet::ConfigError("bad config value in " + path + ": " + e.what());
  }
  return cfg;
}

/// Config flags shared by the subcommands that run (parts of) the pipeline.
/// File values load first, explicitly passed flags override them.
struct ConfigFlags {
  std::string config_path;
  fanet::PipelineConfig flags;  // values captured by CLI11
  CLI::Option* opt_tubelet_len = nullptr;
  CLI::Option* opt_beta = nullptr;
  CLI::Option* opt_alpha = nullptr;
  CLI::Option* opt_final_nms = nullptr;
  CLI::Option* opt_tnms = nullptr;
  CLI::Option* opt_voting = nullptr;
  CLI::Option* opt_no_linking = nullptr;
  CLI::Option* opt_no_merging = nullptr;
  CLI::Option* opt_no_rescoring = nullptr;
  CLI::Option* opt_eval_iou = nullptr;
  bool no_linking = false;
  bool no_merging = false;
  bool no_rescoring = false;
  std::vector<double> eval_thresholds;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON config file; explicit flags override its values");
    opt_tubelet_len = cmd->add_option("--tubelet-len", flags.tubelet_len,
                                      "tubelet length N");
    opt_beta = cmd->add_option("--beta", flags.beta,
                               "confidence floor before linking");
    opt_alpha = cmd->add_option("--alpha", flags.alpha,
                                "top score fraction for tube rescoring");
    opt_final_nms = cmd->add_option("--final-nms-iou", flags.final_nms_iou,
                                    "per-frame NMS IoU threshold");
    opt_tnms = cmd->add_option("--tnms-iou", flags.tnms_iou,
                               "tubelet NMS overlap threshold");
    opt_voting = cmd->add_option("--voting-iou", flags.voting_iou,
                                 "box voting inclusion threshold");
    opt_no_linking = cmd->add_flag("--no-linking", no_linking,
                                   "disable tube building entirely");
    opt_no_merging = cmd->add_flag("--no-merging", no_merging,
                                   "disable tubelet-guided tube merging");
    opt_no_rescoring = cmd->add_flag("--no-rescoring", no_rescoring,
                                     "disable tube score propagation");
    opt_eval_iou = cmd->add_option("--eval-iou", eval_thresholds,
                                   "IoU thresholds for reported mAP");
  }

  fanet::PipelineConfig resolve() const {
    fanet::PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (opt_tubelet_len->count() > 0) cfg.tubelet_len = flags.tubelet_len;
    if (opt_beta->count() > 0) cfg.beta = flags.beta;
    if (opt_alpha->count() > 0) cfg.alpha = flags.alpha;
    if (opt_final_nms->count() > 0) cfg.final_nms_iou = flags.final_nms_iou;
    if (opt_tnms->count() > 0) cfg.tnms_iou = flags.tnms_iou;
    if (opt_voting->count() > 0) cfg.voting_iou = flags.voting_iou;
    if (no_linking) cfg.enable_linking = false;
    if (no_merging) cfg.enable_merging = false;
    if (no_rescoring) cfg.enable_rescoring = false;
    if (opt_eval_iou->count() > 0) cfg.eval_thresholds = eval_thresholds;
    return cfg;
  }
};

std::vector<fanet::DetectionRecord> scenario_detection_records(
    const fanet::Scenario& sc) {
  std::vector<fanet::DetectionRecord> out;
  for (const auto& d : sc.detections) {
    fanet::DetectionRecord r;
    r.video = sc.video_id;
    r.frame = d.frame;
    r.class_id = d.class_id;
    r.score = d.score;
    r.bbox = {d.box.x1, d.box.y1, d.box.x2, d.box.y2};
    r.proposal = d.source_proposal_ids.front();
    out.push_back(std::move(r));
  }
  return out;
}

int cmd_synth(const fanet::ScenarioParams& params, const std::string& out_dir) {
  const fanet::Scenario sc = fanet::generate_scenario(params);
  fs::create_directories(out_dir);

  fanet::write_jsonl_file(out_dir + "/detections.jsonl",
                          scenario_detection_records(sc));

  std::vector<fanet::TubeletRecord> tubelets;
  for (const auto& t : sc.tubelets) tubelets.push_back(fanet::to_record(t));
  fanet::write_jsonl_file(out_dir + "/tubelets.jsonl", tubelets);

  std::vector<fanet::GroundTruthRecord> gts;
  for (const auto& g : sc.ground_truth) gts.push_back(fanet::to_record(g));
  fanet::write_jsonl_file(out_dir + "/groundtruth.jsonl", gts);

  std::cout << "wrote " << sc.detections.size() << " detections, "
            << sc.tubelets.size() << " tubelets, " << sc.ground_truth.size()
            << " ground-truth boxes to " << out_dir << "\n";
  return kExitOk;
}

int cmd_tnms(const std::string& tubelets_path, const std::string& out_path,
             const fanet::PipelineConfig& cfg) {
  cfg.check();
  const auto records =
      fanet::read_jsonl_file<fanet::TubeletRecord>(tubelets_path);
  std::vector<fanet::Tubelet> tubelets;
  std::map<std::pair<std::string, std::string>, const fanet::TubeletRecord*>
      by_key;
  for (const auto& r : records) {
    tubelets.push_back(fanet::to_tubelet(r));
    by_key[{r.video, r.id}] = &r;
  }

  // Survivors are emitted as their original records so unknown fields pass
  // through untouched.
  const auto survivors = fanet::tnms_by_video(tubelets, cfg.tnms_iou);
  std::vector<fanet::TubeletRecord> out;
  for (const auto& [video, group] : survivors) {
    for (const auto& t : group) {
      const auto it = by_key.find({t.video_id, t.id});
      out.push_back(it != by_key.end() ? *it->second : fanet::to_record(t));
    }
  }
  fanet::write_jsonl_file(out_path, out);
  std::cout << "kept " << out.size() << " of " << tubelets.size()
            << " tubelets\n";
  return kExitOk;
}

int cmd_link(const std::string& detections_path,
             const std::string& tubelets_path, const std::string& tubes_out,
             const std::string& detections_out,
             const fanet::PipelineConfig& cfg) {
  cfg.check();
  const auto det_records =
      fanet::read_jsonl_file<fanet::DetectionRecord>(detections_path);
  const auto tub_records =
      fanet::read_jsonl_file<fanet::TubeletRecord>(tubelets_path);

  std::vector<fanet::Tubelet> tubelets;
  std::map<std::string, std::vector<fanet::Tubelet>> tubelets_by_video;
  for (const auto& r : tub_records) {
    fanet::Tubelet t = fanet::to_tubelet(r);
    tubelets_by_video[t.video_id].push_back(std::move(t));
  }

  // The detections are taken as already suppressed and voted; this command
  // runs only the beta filter and the two linking stages.
  std::map<std::pair<std::string, int>, std::vector<fanet::Detection>> groups;
  for (const auto& r : det_records) {
    groups[{r.video, r.class_id}].push_back(fanet::to_detection(r));
  }

  std::vector<fanet::TubeRecord> tubes_out_records;
  std::vector<fanet::DetectionRecord> dets_out_records;
  for (const auto& [key, all_dets] : groups) {
    const std::string& video = key.first;
    const int class_id = key.second;
    const auto dets = fanet::filter_by_beta(all_dets, cfg.beta);
    if (dets.empty()) continue;

    int min_frame = dets.front().frame;
    int max_frame = dets.front().frame;
    for (const auto& d : dets) {
      min_frame = std::min(min_frame, d.frame);
      max_frame = std::max(max_frame, d.frame);
    }
    fanet::FrameDetections frame_sets;
    frame_sets.first_frame = min_frame;
    frame_sets.frames.resize(static_cast<std::size_t>(max_frame - min_frame) + 1);
    for (const auto& d : dets) {
      frame_sets.frames[static_cast<std::size_t>(d.frame - min_frame)].push_back(d);
    }

    const std::string prefix = video + "_c" + std::to_string(class_id) + "_tube";
    std::vector<fanet::Tube> tubes =
        fanet::build_tubes(frame_sets, class_id, video, prefix);
    if (cfg.enable_merging) {
      const auto& video_tubelets = tubelets_by_video[video];
      tubes = fanet::merge_tubes(tubes, video_tubelets,
                                 fanet::TubeletIndex(video_tubelets));
    }
    for (auto& tube : tubes) {
      if (cfg.enable_rescoring) tube = fanet::rescore_tube(tube, cfg.alpha);
      tubes_out_records.push_back(fanet::to_record(tube));
      if (!detections_out.empty()) {
        for (const auto& e : tube.entries) {
          fanet::DetectionRecord r;
          r.video = video;
          r.frame = e.frame;
          r.class_id = e.class_id;
          r.score = e.score;
          r.bbox = {e.box.x1, e.box.y1, e.box.x2, e.box.y2};
          if (!e.source_proposal_ids.empty()) {
            r.proposal = e.source_proposal_ids.front();
          }
          dets_out_records.push_back(std::move(r));
        }
      }
    }
  }

  fanet::write_jsonl_file(tubes_out, tubes_out_records);
  if (!detections_out.empty()) {
    fanet::write_jsonl_file(detections_out, dets_out_records);
  }
  std::cout << "linked " << tubes_out_records.size() << " tubes\n";
  return kExitOk;
}

int cmd_pool(std::uint64_t seed, int n_frames, int out_size, int channels,
             const std::string& out_path) {
  if (n_frames < 1 || out_size < 1 || channels < 1) {
    throw fanet::ConfigError("pool: frames, size, and channels must be >= 1");
  }
  fanet::Rng rng(seed);

  // Synthetic two-level pyramid per frame plus a drifting tubelet.
  fanet::AggregationConfig cfg;
  cfg.out_h = out_size;
  cfg.out_w = out_size;
  cfg.min_level = 2;
  cfg.max_level = 3;

  fanet::FramePyramid pyramids;
  for (int f = 0; f < n_frames; ++f) {
    fanet::FeatureMap l2(32, 32, channels, 4.0);
    fanet::FeatureMap l3(16, 16, channels, 8.0);
    for (double& v : l2.data) v = rng.uniform();
    for (double& v : l3.data) v = rng.uniform();
    pyramids[f].emplace(2, std::move(l2));
    pyramids[f].emplace(3, std::move(l3));
  }

  fanet::Tubelet tubelet;
  tubelet.id = "demo";
  tubelet.end_frame = n_frames - 1;
  double x = 20.0;
  for (int f = 0; f < n_frames; ++f) {
    tubelet.boxes.push_back(fanet::BBox{x, 30.0, x + 50.0, 80.0});
    tubelet.box_scores.push_back(0.9);
    tubelet.box_ids.push_back("demo_f" + std::to_string(f));
    x += 3.0;
  }

  const fanet::RoIFeature pooled =
      fanet::aggregate_tubelet_features(pyramids, tubelet, cfg);

  double checksum = 0.0;
  for (double v : pooled.data) checksum += v;
  std::cout << "pooled " << n_frames << " frames into " << pooled.h << "x"
            << pooled.w << "x" << pooled.channels
            << " (size independent of N); checksum " << checksum << "\n";

  if (!out_path.empty()) {
    json j;
    j["h"] = pooled.h;
    j["w"] = pooled.w;
    j["channels"] = pooled.channels;
    j["data"] = pooled.data;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw fanet::IngestError("cannot open " + out_path + " for writing");
    out << j.dump() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& detections_path, const std::string& gt_path,
             std::vector<double> thresholds, bool with_range,
             const std::string& out_path) {
  if (thresholds.empty()) thresholds = {0.5};
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw fanet::ConfigError("evaluation threshold outside [0,1]");
    }
  }
  const auto det_records =
      fanet::read_jsonl_file<fanet::DetectionRecord>(detections_path);
  const auto gt_records =
      fanet::read_jsonl_file<fanet::GroundTruthRecord>(gt_path);

  std::vector<fanet::EvalDetection> dets;
  for (const auto& r : det_records) {
    fanet::EvalDetection e;
    e.video_id = r.video;
    e.frame = r.frame;
    e.class_id = r.class_id;
    e.score = r.score;
    e.box = fanet::BBox{r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3]};
    dets.push_back(std::move(e));
  }
  std::vector<fanet::GroundTruthBox> gts;
  for (const auto& r : gt_records) gts.push_back(fanet::to_ground_truth(r));

  json report;
  for (double thresh : thresholds) {
    const auto aps = fanet::per_class_ap(dets, gts, thresh);
    char key[32];
    std::snprintf(key, sizeof key, "%.2f", thresh);
    for (const auto& [cls, ap] : aps) {
      std::printf("AP@%.2f class %d: %.4f\n", thresh, cls, ap);
      report["per_class"][key][std::to_string(cls)] = ap;
    }
    const double map = fanet::evaluate_map(dets, gts, thresh);
    std::printf("mAP@%.2f: %.4f\n", thresh, map);
    report["map"][key] = map;
  }
  if (with_range) {
    const double range = fanet::ap_range(dets, gts);
    std::printf("mAP@[0.50:0.95]: %.4f\n", range);
    report["map_range_050_095"] = range;
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw fanet::IngestError("cannot open " + out_path + " for writing");
    out << report.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_pipeline(const std::string& detections_path,
                 const std::string& tubelets_path, const std::string& gt_path,
                 const std::string& out_dir,
                 const fanet::PipelineConfig& cfg) {
  const auto det_records =
      fanet::read_jsonl_file<fanet::DetectionRecord>(detections_path);
  const auto tub_records =
      fanet::read_jsonl_file<fanet::TubeletRecord>(tubelets_path);
  std::vector<fanet::GroundTruthRecord> gt_records;
  if (!gt_path.empty()) {
    gt_records = fanet::read_jsonl_file<fanet::GroundTruthRecord>(gt_path);
  }

  const fanet::PipelineResult result =
      fanet::run_pipeline(det_records, tub_records, cfg, gt_records);

  fs::create_directories(out_dir);
  fanet::write_jsonl_file(out_dir + "/detections.jsonl", result.detections);
  std::vector<fanet::TubeRecord> tubes;
  for (const auto& t : result.tubes) tubes.push_back(fanet::to_record(t));
  fanet::write_jsonl_file(out_dir + "/tubes.jsonl", tubes);

  std::cout << "pipeline: " << result.detections.size() << " detections, "
            << tubes.size() << " tubes -> " << out_dir << "\n";

  if (result.metrics) {
    json report;
    for (const auto& [thresh, map] : result.metrics->map_by_threshold) {
      char key[32];
      std::snprintf(key, sizeof key, "%.2f", thresh);
      report["map"][key] = map;
      std::printf("mAP@%.2f: %.4f\n", thresh, map);
    }
    report["map_range_050_095"] = result.metrics->ap_range_050_095;
    std::printf("mAP@[0.50:0.95]: %.4f\n", result.metrics->ap_range_050_095);
    std::ofstream out(out_dir + "/metrics.json", std::ios::binary);
    out << report.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fanet - video detection post-processing toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic scenario");
  fanet::ScenarioParams sp;
  std::string synth_out = "scenario";
  synth->add_option("--seed", sp.seed, "scenario seed")->required();
  synth->add_option("--out-dir", synth_out, "output directory");
  synth->add_option("--video", sp.video_id, "video id in emitted records");
  synth->add_option("--tracks", sp.tracks.n_tracks, "number of tracks");
  synth->add_option("--frames", sp.tracks.n_frames, "number of frames");
  synth->add_option("--classes", sp.tracks.n_classes, "number of classes");
  synth->add_option("--image-w", sp.tracks.image_w, "image width");
  synth->add_option("--image-h", sp.tracks.image_h, "image height");
  synth->add_option("--max-speed", sp.tracks.max_speed, "per-axis speed bound");
  synth->add_option("--motion-jitter", sp.tracks.motion_jitter,
                    "track center jitter sigma");
  synth->add_option("--p-miss", sp.degrade.p_miss, "detection dropout probability");
  synth->add_option("--fp-rate", sp.degrade.fp_rate, "false positives per frame");
  synth->add_option("--p-confuse", sp.degrade.p_confuse,
                    "class confusion probability");
  synth->add_option("--loc-sigma", sp.degrade.loc_sigma, "box jitter sigma");
  synth->add_option("--score-mu", sp.degrade.tp_score_mu,
                    "true detection score mean");
  synth->add_option("--score-sigma", sp.degrade.tp_score_sigma,
                    "true detection score sigma");
  synth->add_option("--tubelet-len", sp.tubelets.length, "tubelet length N");
  synth->add_option("--tubelet-jitter", sp.tubelets.box_jitter,
                    "tubelet proposal box jitter sigma");

  // tnms
  auto* tnms = app.add_subcommand("tnms", "tubelet non-maximum suppression");
  std::string tnms_in, tnms_out = "tubelets_kept.jsonl";
  tnms->add_option("--tubelets", tnms_in, "input tubelets.jsonl")->required();
  tnms->add_option("--out", tnms_out, "output tubelets file");
  ConfigFlags tnms_cfg;
  tnms_cfg.attach(tnms);

  // link
  auto* link = app.add_subcommand(
      "link", "long-term linking over already-suppressed detections");
  std::string link_dets, link_tubs, link_tubes_out = "tubes.jsonl",
                                    link_dets_out;
  link->add_option("--detections", link_dets, "input detections.jsonl")->required();
  link->add_option("--tubelets", link_tubs, "input tubelets.jsonl")->required();
  link->add_option("--tubes-out", link_tubes_out, "output tubes file");
  link->add_option("--detections-out", link_dets_out,
                   "optional rescored detections file");
  ConfigFlags link_cfg;
  link_cfg.attach(link);

  // pool
  auto* pool = app.add_subcommand(
      "pool", "temporal pooling demo on synthetic feature maps");
  std::uint64_t pool_seed = 0;
  int pool_frames = 6, pool_size = 7, pool_channels = 256;
  std::string pool_out;
  pool->add_option("--seed", pool_seed, "feature map seed")->required();
  pool->add_option("--frames", pool_frames, "number of frames N");
  pool->add_option("--size", pool_size, "pooled spatial size");
  pool->add_option("--channels", pool_channels, "feature channels");
  pool->add_option("--out", pool_out, "optional pooled-grid JSON output");

  // eval
  auto* eval = app.add_subcommand("eval", "AP / mAP evaluation");
  std::string eval_dets, eval_gt, eval_out;
  std::vector<double> eval_thresholds;
  bool eval_range = false;
  eval->add_option("--detections", eval_dets, "detections.jsonl")->required();
  eval->add_option("--gt", eval_gt, "groundtruth.jsonl")->required();
  eval->add_option("--iou", eval_thresholds, "IoU matching thresholds");
  eval->add_flag("--range", eval_range, "also report mAP averaged over 0.50:0.05:0.95");
  eval->add_option("--out", eval_out, "optional metrics JSON output");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "full post-processing chain");
  std::string pipe_dets, pipe_tubs, pipe_gt, pipe_out = "out";
  pipeline->add_option("--detections", pipe_dets, "detections.jsonl")->required();
  pipeline->add_option("--tubelets", pipe_tubs, "tubelets.jsonl")->required();
  pipeline->add_option("--gt", pipe_gt, "optional ground truth for metrics");
  pipeline->add_option("--out-dir", pipe_out, "output directory");
  ConfigFlags pipe_cfg;
  pipe_cfg.attach(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) return cmd_synth(sp, synth_out);
    if (tnms->parsed()) return cmd_tnms(tnms_in, tnms_out, tnms_cfg.resolve());
    if (link->parsed()) {
      return cmd_link(link_dets, link_tubs, link_tubes_out, link_dets_out,
                      link_cfg.resolve());
    }
    if (pool->parsed()) {
      return cmd_pool(pool_seed, pool_frames, pool_size, pool_channels, pool_out);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_dets, eval_gt, eval_thresholds, eval_range, eval_out);
    }
    if (pipeline->parsed()) {
      return cmd_pipeline(pipe_dets, pipe_tubs, pipe_gt, pipe_out,
                          pipe_cfg.resolve());
    }
  } catch (const fanet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fanet::IngestError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return kExitIngest;
  } catch (const fanet::Error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
