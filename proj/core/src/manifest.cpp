// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/manifest.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "saber/annotation.hpp"
#include "saber/consistency.hpp"
#include "saber/preference.hpp"

namespace saber {

using nlohmann::json;

std::string to_string(Language lang) { return lang == Language::CN ? "cn" : "en"; }

Language language_from_string(const std::string& s) {
  if (s == "cn") return Language::CN;
  if (s == "en") return Language::EN;
  throw Error("unknown language: " + s);
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::raw: return "raw";
    case Stage::filtered: return "filtered";
    case Stage::annotated: return "annotated";
    case Stage::qa_passed: return "qa_passed";
    case Stage::assessed: return "assessed";
    case Stage::test_set: return "test_set";
    case Stage::preference: return "preference";
  }
  throw Error("unknown stage value");
}

Stage stage_from_string(const std::string& s) {
  if (s == "raw") return Stage::raw;
  if (s == "filtered") return Stage::filtered;
  if (s == "annotated") return Stage::annotated;
  if (s == "qa_passed") return Stage::qa_passed;
  if (s == "assessed") return Stage::assessed;
  if (s == "test_set") return Stage::test_set;
  if (s == "preference") return Stage::preference;
  throw Error("unknown stage: " + s);
}

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::too_short: return "too_short";
    case RejectReason::too_long: return "too_long";
    case RejectReason::low_resolution: return "low_resolution";
    case RejectReason::missing_track: return "missing_track";
    case RejectReason::noisy: return "noisy";
  }
  throw Error("unknown reject reason value");
}

namespace {

// JSON cannot carry infinities as numbers; preference scores may be -inf
// (unparseable candidates), so non-finite scores ride as marker strings.
json score_to_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) throw Error("score is NaN");
  return v > 0 ? "Infinity" : "-Infinity";
}

double score_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw Error("bad score value");
}

json record_to_json(const Clip& c) {
  json j;
  j["id"] = c.id;
  j["duration_s"] = c.duration_s;
  j["video_ref"] = c.video_ref;
  j["audio_ref"] = c.audio_ref;
  j["language"] = to_string(c.language);
  j["resolution_ok"] = c.resolution_ok;
  j["has_audio_track"] = c.has_audio_track;
  j["noise_flag"] = c.noise_flag;
  return j;
}

void record_from_json(const json& j, Clip& c) {
  c.id = j.at("id").get<std::string>();
  c.duration_s = j.at("duration_s").get<double>();
  c.video_ref = j.at("video_ref").get<std::string>();
  c.audio_ref = j.at("audio_ref").get<std::string>();
  c.language = language_from_string(j.at("language").get<std::string>());
  c.resolution_ok = j.at("resolution_ok").get<bool>();
  c.has_audio_track = j.at("has_audio_track").get<bool>();
  c.noise_flag = j.at("noise_flag").get<bool>();
}

json record_to_json(const SixDimAnnotation& a) {
  json j;
  j["clip_id"] = a.clip_id;
  for (std::size_t d = 0; d < kDimensionNames.size(); ++d) {
    j[std::string(kDimensionNames[d])] = dimension_field(a, d);
  }
  return j;
}

void record_from_json(const json& j, SixDimAnnotation& a) {
  a.clip_id = j.at("clip_id").get<std::string>();
  for (std::size_t d = 0; d < kDimensionNames.size(); ++d) {
    dimension_field(a, d) = j.at(std::string(kDimensionNames[d])).get<std::string>();
  }
}

json record_to_json(const ConsistencyAssessment& a) {
  json j;
  j["clip_id"] = a.clip_id;
  j["relation"] = to_string(a.relation);
  j["intensity"] = a.intensity;
  return j;
}

void record_from_json(const json& j, ConsistencyAssessment& a) {
  a.clip_id = j.at("clip_id").get<std::string>();
  a.relation = relation_from_string(j.at("relation").get<std::string>());
  a.intensity = j.at("intensity").get<int>();
  if (a.intensity < 0 || a.intensity > 10) {
    throw Error("intensity outside [0, 10]: " + std::to_string(a.intensity));
  }
}

json record_to_json(const TestSetEntry& e) {
  json j;
  j["clip_id"] = e.clip_id;
  j["subset"] = to_string(e.subset);
  return j;
}

void record_from_json(const json& j, TestSetEntry& e) {
  e.clip_id = j.at("clip_id").get<std::string>();
  e.subset = relation_from_string(j.at("subset").get<std::string>());
}

json record_to_json(const PreferencePair& p) {
  json j;
  j["input_id"] = p.input_id;
  j["winner"] = p.winner;
  j["loser"] = p.loser;
  j["winner_score"] = score_to_json(p.winner_score);
  j["loser_score"] = score_to_json(p.loser_score);
  return j;
}

void record_from_json(const json& j, PreferencePair& p) {
  p.input_id = j.at("input_id").get<std::string>();
  p.winner = j.at("winner").get<std::string>();
  p.loser = j.at("loser").get<std::string>();
  p.winner_score = score_from_json(j.at("winner_score"));
  p.loser_score = score_from_json(j.at("loser_score"));
}

// Unique-id accessor per record type; records without an intrinsic unique
// key (preference pairs share input_id) opt out of the duplicate check.
std::optional<std::string> record_id(const Clip& c) { return c.id; }
std::optional<std::string> record_id(const SixDimAnnotation& a) { return a.clip_id; }
std::optional<std::string> record_id(const ConsistencyAssessment& a) { return a.clip_id; }
std::optional<std::string> record_id(const TestSetEntry& e) { return e.clip_id; }
std::optional<std::string> record_id(const PreferencePair&) { return std::nullopt; }

bool stage_allows(Stage s, const Clip*) { return s == Stage::raw || s == Stage::filtered; }
bool stage_allows(Stage s, const SixDimAnnotation*) {
  return s == Stage::annotated || s == Stage::qa_passed;
}
bool stage_allows(Stage s, const ConsistencyAssessment*) { return s == Stage::assessed; }
bool stage_allows(Stage s, const TestSetEntry*) { return s == Stage::test_set; }
bool stage_allows(Stage s, const PreferencePair*) { return s == Stage::preference; }

json parse_line(const std::string& line, std::size_t line_number) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw Error("not a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw MalformedLine(line_number, e.what());
  }
}

}  // namespace

template <typename Record>
Manifest<Record> load_manifest(const std::filesystem::path& path, Stage expected) {
  if (!stage_allows(expected, static_cast<const Record*>(nullptr))) {
    throw StageMismatch(to_string(expected), "a stage compatible with this record type");
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot read manifest: " + path.string());

  Manifest<Record> m;
  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  std::set<std::string> seen_ids;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j = parse_line(line, line_number);
    if (!have_header) {
      if (!j.contains("stage")) throw MalformedLine(line_number, "missing manifest header");
      Stage found;
      try {
        found = stage_from_string(j.at("stage").get<std::string>());
      } catch (const json::exception& e) {
        throw MalformedLine(line_number, e.what());
      }
      if (found != expected) throw StageMismatch(to_string(expected), to_string(found));
      m.stage = found;
      have_header = true;
      continue;
    }
    Record r;
    try {
      record_from_json(j, r);
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    } catch (const Error& e) {
      throw MalformedLine(line_number, e.what());
    }
    if (auto id = record_id(r)) {
      if (!seen_ids.insert(*id).second) throw DuplicateId(*id);
    }
    m.records.push_back(std::move(r));
  }
  if (!have_header) throw MalformedLine(1, "missing manifest header");
  return m;
}

template <typename Record>
void save_manifest(const Manifest<Record>& manifest, const std::filesystem::path& path) {
  if (!stage_allows(manifest.stage, static_cast<const Record*>(nullptr))) {
    throw StageMismatch(to_string(manifest.stage), "a stage compatible with this record type");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest: " + path.string());
  json header;
  header["stage"] = to_string(manifest.stage);
  out << header.dump() << '\n';
  for (const Record& r : manifest.records) out << record_to_json(r).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

template Manifest<Clip> load_manifest<Clip>(const std::filesystem::path&, Stage);
template Manifest<SixDimAnnotation> load_manifest<SixDimAnnotation>(const std::filesystem::path&,
                                                                    Stage);
template Manifest<ConsistencyAssessment> load_manifest<ConsistencyAssessment>(
    const std::filesystem::path&, Stage);
template Manifest<TestSetEntry> load_manifest<TestSetEntry>(const std::filesystem::path&, Stage);
template Manifest<PreferencePair> load_manifest<PreferencePair>(const std::filesystem::path&,
                                                                Stage);

template void save_manifest<Clip>(const Manifest<Clip>&, const std::filesystem::path&);
template void save_manifest<SixDimAnnotation>(const Manifest<SixDimAnnotation>&,
                                              const std::filesystem::path&);
template void save_manifest<ConsistencyAssessment>(const Manifest<ConsistencyAssessment>&,
                                                   const std::filesystem::path&);
template void save_manifest<TestSetEntry>(const Manifest<TestSetEntry>&,
                                          const std::filesystem::path&);
template void save_manifest<PreferencePair>(const Manifest<PreferencePair>&,
                                            const std::filesystem::path&);

std::filesystem::path rejected_report_path(const std::filesystem::path& manifest_path) {
  std::filesystem::path p = manifest_path;
  p.replace_extension(".rejected.jsonl");
  return p;
}

ClipFilterResult filter_clips(const Manifest<Clip>& m) {
  if (m.stage != Stage::raw && m.stage != Stage::filtered) {
    throw StageMismatch("raw or filtered", to_string(m.stage));
  }
  ClipFilterResult result;
  result.kept.stage = Stage::filtered;
  for (const Clip& c : m.records) {
    if (c.duration_s < 0.5) {
      result.rejected.emplace_back(c, RejectReason::too_short);
    } else if (c.duration_s > 30.0) {
      result.rejected.emplace_back(c, RejectReason::too_long);
    } else if (!c.resolution_ok) {
      result.rejected.emplace_back(c, RejectReason::low_resolution);
    } else if (!c.has_audio_track) {
      result.rejected.emplace_back(c, RejectReason::missing_track);
    } else if (c.noise_flag) {
      result.rejected.emplace_back(c, RejectReason::noisy);
    } else {
      result.kept.records.push_back(c);
    }
  }
  return result;
}

void write_clip_rejections(const std::vector<std::pair<Clip, RejectReason>>& rejected,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write rejection report: " + path.string());
  for (const auto& [clip, reason] : rejected) {
    json j = record_to_json(clip);
    j["reject_reason"] = to_string(reason);
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace saber
