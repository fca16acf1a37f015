// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "saber/errors.hpp"

namespace saber {

enum class Language { CN, EN };

std::string to_string(Language lang);
Language language_from_string(const std::string& s);

// Pipeline stages, in flow order. A manifest file starts with a header line
// `{"stage": "<name>"}` naming the stage of every record that follows.
enum class Stage { raw, filtered, annotated, qa_passed, assessed, test_set, preference };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& s);

// Metadata record for one audio-visual segment. Media are referenced by
// opaque locators; probing results arrive as pre-computed flags.
struct Clip {
  std::string id;
  double duration_s = 0.0;
  std::string video_ref;
  std::string audio_ref;
  Language language = Language::EN;
  bool resolution_ok = true;
  bool has_audio_track = true;
  bool noise_flag = false;

  bool operator==(const Clip&) const = default;
};

enum class RejectReason { too_short, too_long, low_resolution, missing_track, noisy };

std::string to_string(RejectReason reason);

template <typename Record>
struct Manifest {
  Stage stage = Stage::raw;
  std::vector<Record> records;
};

// Reads a JSON Lines manifest: header line first, one record per line after.
// Throws MalformedLine (bad JSON or bad field), DuplicateId, StageMismatch
// (header stage != expected, or expected stage cannot hold Record).
template <typename Record>
Manifest<Record> load_manifest(const std::filesystem::path& path, Stage expected);

template <typename Record>
void save_manifest(const Manifest<Record>& manifest, const std::filesystem::path& path);

// Sibling path for rejection reports: `name.jsonl` -> `name.rejected.jsonl`.
std::filesystem::path rejected_report_path(const std::filesystem::path& manifest_path);

struct ClipFilterResult {
  Manifest<Clip> kept;  // stage = filtered
  std::vector<std::pair<Clip, RejectReason>> rejected;
};

// Admission filter. Keeps clips with duration in the closed interval
// [0.5, 30.0] s, healthy resolution, an audio track, and no noise flag.
// When several reasons apply the first in declaration order of RejectReason
// is reported. Accepts raw or filtered input (idempotent on the latter).
ClipFilterResult filter_clips(const Manifest<Clip>& m);

void write_clip_rejections(const std::vector<std::pair<Clip, RejectReason>>& rejected,
                           const std::filesystem::path& path);

}  // namespace saber
