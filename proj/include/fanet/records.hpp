#pragma once

#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fanet/errors.hpp"
#include "fanet/evaluation.hpp"
#include "fanet/geometry.hpp"
#include "fanet/linking.hpp"
#include "fanet/tubelet.hpp"

namespace fanet {

using json = nlohmann::json;

/// One line of a detections file.
struct DetectionRecord {
  std::string video;
  int frame = 0;
  int class_id = 0;
  double score = 0.0;
  std::array<double, 4> bbox{};
  std::optional<std::string> proposal;
  json extra;  // unknown fields, preserved on pass-through

  static constexpr const char* kName = "detection";
};

/// One line of a tubelets file.
struct TubeletRecord {
  std::string video;
  std::string id;
  int end_frame = 0;
  std::vector<std::array<double, 4>> boxes;
  std::vector<double> scores;
  std::vector<std::string> box_ids;
  json extra;

  static constexpr const char* kName = "tubelet";
};

/// One line of a tubes file.
struct TubeRecord {
  std::string video;
  std::string id;
  int class_id = 0;
  std::vector<int> frames;
  std::vector<std::array<double, 4>> boxes;
  std::vector<double> orig_scores;
  double final_score = 0.0;
  json extra;

  static constexpr const char* kName = "tube";
};

/// One line of a ground-truth file.
struct GroundTruthRecord {
  std::string video;
  int frame = 0;
  int class_id = 0;
  std::array<double, 4> bbox{};
  std::string track;
  json extra;

  static constexpr const char* kName = "ground truth";
};

namespace detail {

inline const json& require_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw IngestError(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

template <typename T>
T field_as(const json& j, const char* key) {
  try {
    return require_field(j, key).get<T>();
  } catch (const json::exception&) {
    throw IngestError(std::string("field \"") + key + "\" has wrong type");
  }
}

inline std::array<double, 4> box_array(const json& j, const char* key) {
  const json& value = require_field(j, key);
  if (!value.is_array() || value.size() != 4) {
    throw IngestError(std::string("field \"") + key +
                      "\" is not a 4-element array");
  }
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!value[i].is_number()) {
      throw IngestError(std::string("field \"") + key +
                        "\" has a non-numeric coordinate");
    }
    out[i] = value[i].get<double>();
  }
  if (!BBox{out[0], out[1], out[2], out[3]}.valid()) {
    throw IngestError(std::string("field \"") + key +
                      "\" is not a valid corner-form box");
  }
  return out;
}

inline json extras_without(const json& j,
                           std::initializer_list<const char*> known) {
  json extra = json::object();
  for (const auto& [key, value] : j.items()) {
    bool is_known = false;
    for (const char* k : known) {
      if (key == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[key] = value;
  }
  return extra;
}

}  // namespace detail

inline DetectionRecord parse_record(const json& j, const DetectionRecord*) {
  DetectionRecord r;
  r.video = detail::field_as<std::string>(j, "video");
  r.frame = detail::field_as<int>(j, "frame");
  r.class_id = detail::field_as<int>(j, "class");
  r.score = detail::field_as<double>(j, "score");
  r.bbox = detail::box_array(j, "bbox");
  if (j.contains("proposal")) {
    r.proposal = detail::field_as<std::string>(j, "proposal");
  }
  r.extra = detail::extras_without(
      j, {"video", "frame", "class", "score", "bbox", "proposal"});
  return r;
}

inline json to_json(const DetectionRecord& r) {
  json j = r.extra.is_object() ? r.extra : json::object();
  j["video"] = r.video;
  j["frame"] = r.frame;
  j["class"] = r.class_id;
  j["score"] = r.score;
  j["bbox"] = r.bbox;
  if (r.proposal) j["proposal"] = *r.proposal;
  return j;
}

inline TubeletRecord parse_record(const json& j, const TubeletRecord*) {
  TubeletRecord r;
  r.video = detail::field_as<std::string>(j, "video");
  r.id = detail::field_as<std::string>(j, "id");
  r.end_frame = detail::field_as<int>(j, "end_frame");
  const json& boxes = detail::require_field(j, "boxes");
  if (!boxes.is_array() || boxes.empty()) {
    throw IngestError("field \"boxes\" is not a non-empty array");
  }
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    json holder;
    holder["b"] = boxes[k];
    r.boxes.push_back(detail::box_array(holder, "b"));
  }
  r.scores = detail::field_as<std::vector<double>>(j, "scores");
  r.box_ids = detail::field_as<std::vector<std::string>>(j, "box_ids");
  if (r.scores.size() != r.boxes.size() || r.box_ids.size() != r.boxes.size()) {
    throw IngestError("boxes/scores/box_ids lengths disagree");
  }
  r.extra = detail::extras_without(
      j, {"video", "id", "end_frame", "boxes", "scores", "box_ids"});
  return r;
}

inline json to_json(const TubeletRecord& r) {
  json j = r.extra.is_object() ? r.extra : json::object();
  j["video"] = r.video;
  j["id"] = r.id;
  j["end_frame"] = r.end_frame;
  j["boxes"] = r.boxes;
  j["scores"] = r.scores;
  j["box_ids"] = r.box_ids;
  return j;
}

inline TubeRecord parse_record(const json& j, const TubeRecord*) {
  TubeRecord r;
  r.video = detail::field_as<std::string>(j, "video");
  r.id = detail::field_as<std::string>(j, "id");
  r.class_id = detail::field_as<int>(j, "class");
  r.frames = detail::field_as<std::vector<int>>(j, "frames");
  const json& boxes = detail::require_field(j, "boxes");
  if (!boxes.is_array()) throw IngestError("field \"boxes\" is not an array");
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    json holder;
    holder["b"] = boxes[k];
    r.boxes.push_back(detail::box_array(holder, "b"));
  }
  r.orig_scores = detail::field_as<std::vector<double>>(j, "orig_scores");
  r.final_score = detail::field_as<double>(j, "final_score");
  if (r.frames.size() != r.boxes.size() ||
      r.orig_scores.size() != r.boxes.size()) {
    throw IngestError("frames/boxes/orig_scores lengths disagree");
  }
  r.extra = detail::extras_without(j, {"video", "id", "class", "frames",
                                       "boxes", "orig_scores", "final_score"});
  return r;
}

inline json to_json(const TubeRecord& r) {
  json j = r.extra.is_object() ? r.extra : json::object();
  j["video"] = r.video;
  j["id"] = r.id;
  j["class"] = r.class_id;
  j["frames"] = r.frames;
  j["boxes"] = r.boxes;
  j["orig_scores"] = r.orig_scores;
  j["final_score"] = r.final_score;
  return j;
}

inline GroundTruthRecord parse_record(const json& j, const GroundTruthRecord*) {
  GroundTruthRecord r;
  r.video = detail::field_as<std::string>(j, "video");
  r.frame = detail::field_as<int>(j, "frame");
  r.class_id = detail::field_as<int>(j, "class");
  r.bbox = detail::box_array(j, "bbox");
  r.track = detail::field_as<std::string>(j, "track");
  r.extra =
      detail::extras_without(j, {"video", "frame", "class", "bbox", "track"});
  return r;
}

inline json to_json(const GroundTruthRecord& r) {
  json j = r.extra.is_object() ? r.extra : json::object();
  j["video"] = r.video;
  j["frame"] = r.frame;
  j["class"] = r.class_id;
  j["bbox"] = r.bbox;
  j["track"] = r.track;
  return j;
}

/// Reads a JSON-Lines stream. Blank lines are ignored; any malformed line
/// raises IngestError carrying the source name and 1-based line number.
template <typename Record>
std::vector<Record> read_jsonl(std::istream& in, const std::string& source) {
  std::vector<Record> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IngestError(source, line_no, std::string("bad JSON: ") + e.what());
    }
    if (!j.is_object()) {
      throw IngestError(source, line_no, "line is not a JSON object");
    }
    try {
      records.push_back(parse_record(j, static_cast<const Record*>(nullptr)));
    } catch (const IngestError& e) {
      throw IngestError(source, line_no,
                        std::string("bad ") + Record::kName + " record: " +
                            e.what());
    }
  }
  return records;
}

template <typename Record>
std::vector<Record> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  return read_jsonl<Record>(in, path);
}

template <typename Record>
void write_jsonl(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) {
    out << to_json(r).dump() << "\n";
  }
}

template <typename Record>
void write_jsonl_file(const std::string& path,
                      const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot open " + path + " for writing");
  write_jsonl(out, records);
}

// Conversions between the wire records and the core types.

inline Detection to_detection(const DetectionRecord& r) {
  Detection d;
  d.box = BBox{r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3]};
  check_box(d.box);
  d.class_id = r.class_id;
  d.score = r.score;
  d.frame = r.frame;
  if (r.proposal) d.source_proposal_ids = {*r.proposal};
  return d;
}

inline Tubelet to_tubelet(const TubeletRecord& r) {
  Tubelet t;
  t.id = r.id;
  t.video_id = r.video;
  t.end_frame = r.end_frame;
  for (const auto& b : r.boxes) {
    t.boxes.push_back(BBox{b[0], b[1], b[2], b[3]});
  }
  t.box_scores = r.scores;
  t.box_ids = r.box_ids;
  t.check();
  return t;
}

inline TubeletRecord to_record(const Tubelet& t) {
  TubeletRecord r;
  r.video = t.video_id;
  r.id = t.id;
  r.end_frame = t.end_frame;
  for (const auto& b : t.boxes) r.boxes.push_back({b.x1, b.y1, b.x2, b.y2});
  r.scores = t.box_scores;
  r.box_ids = t.box_ids;
  return r;
}

inline TubeRecord to_record(const Tube& tube) {
  TubeRecord r;
  r.video = tube.video_id;
  r.id = tube.id;
  r.class_id = tube.class_id;
  for (std::size_t k = 0; k < tube.entries.size(); ++k) {
    const Detection& d = tube.entries[k];
    r.frames.push_back(d.frame);
    r.boxes.push_back({d.box.x1, d.box.y1, d.box.x2, d.box.y2});
    r.orig_scores.push_back(tube.original_scores[k]);
  }
  r.final_score = tube.final_score;
  return r;
}

inline GroundTruthBox to_ground_truth(const GroundTruthRecord& r) {
  GroundTruthBox g;
  g.video_id = r.video;
  g.frame = r.frame;
  g.class_id = r.class_id;
  g.box = BBox{r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3]};
  check_box(g.box);
  g.track_id = r.track;
  return g;
}

inline GroundTruthRecord to_record(const GroundTruthBox& g) {
  GroundTruthRecord r;
  r.video = g.video_id;
  r.frame = g.frame;
  r.class_id = g.class_id;
  r.bbox = {g.box.x1, g.box.y1, g.box.x2, g.box.y2};
  r.track = g.track_id;
  return r;
}

}  // namespace fanet
