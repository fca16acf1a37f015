// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "saber/clients.hpp"
#include "saber/consistency.hpp"
#include "saber/manifest.hpp"
#include "saber/qa.hpp"

namespace saber {

// Deterministic synthetic corpus and the rule-based mock clients that stand
// in for generation/judge backends. Everything here is a pure function of
// its seed, so fixture files and offline pipeline runs are byte-stable.

std::uint64_t fnv1a64(std::string_view s);

// Seeded hash of (tag, parts...) used for every synthetic choice.
std::uint64_t synth_hash(std::uint64_t seed, std::string_view tag, std::string_view a = "",
                         std::string_view b = "");

struct FixtureSpec {
  int clip_count = 120;
  std::uint64_t seed = 20260819;
};

// Raw clip metadata with deliberate admission-filter violations mixed in
// (short, long, low-res, missing track, noisy) plus pinned boundary clips at
// exactly 0.5 s and 30.0 s. Roughly one clip in five is CN.
Manifest<Clip> synthetic_raw_clips(const FixtureSpec& spec);

// Ground-truth transcript text for a clip; same derivation the annotation
// mock uses, so WER agreement is controlled by the corruption flag alone.
std::string synthetic_transcript_text(const std::string& clip_id, Language lang,
                                      std::uint64_t seed);

// Whether the annotation mock corrupts this clip's speech content (an
// injected auditory hallucination the WER filter should reject).
bool synthetic_hallucinates(const std::string& clip_id, std::uint64_t seed);

std::map<std::string, Transcript> synthetic_transcripts(const Manifest<Clip>& clips,
                                                        std::uint64_t seed);

// Independent video descriptions keyed by clip id.
std::map<std::string, std::string> synthetic_descriptions(const Manifest<Clip>& clips,
                                                          std::uint64_t seed);

// Exactly total/2 assessments per relation, intensities drawn 0..10,
// clip ids synthesized. Throws Error on odd total.
std::vector<ConsistencyAssessment> synthetic_assessments(int total, std::uint64_t seed);

// Small (predicted, gold) label file for accuracy demos.
std::vector<std::pair<std::string, std::string>> synthetic_predictions(int count,
                                                                       std::uint64_t seed);

// --- stage mocks ---
//
// Each mock keys on the `clip_id: <id>` marker that the shipped prompt
// templates and payload builders always include, and derives its reply from
// synth_hash(seed, ...). The same seed therefore reproduces the same
// pipeline bytes end to end.

std::shared_ptr<MockTransport> make_annotation_mock(std::uint64_t seed);
std::shared_ptr<MockTransport> make_semantic_judge_mock(std::uint64_t seed);
std::shared_ptr<MockTransport> make_assessment_judge_mock(std::uint64_t seed);
std::shared_ptr<MockTransport> make_sampling_mock(std::uint64_t seed);
std::shared_ptr<MockTransport> make_preference_judge_mock(std::uint64_t seed);
std::shared_ptr<MockTransport> make_overlap_judge_mock(std::uint64_t seed);
std::shared_ptr<MockTransport> make_sixdim_judge_mock(std::uint64_t seed);

// Extracts the `clip_id: <id>` marker from request text; empty when absent.
std::string extract_clip_marker(const std::string& text);

// Writes the complete fixture set (raw clips, transcripts, descriptions,
// assessments, predictions) into dir.
void write_fixture_files(const std::filesystem::path& dir, const FixtureSpec& spec);

}  // namespace saber
