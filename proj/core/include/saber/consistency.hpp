// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "saber/annotation.hpp"
#include "saber/clients.hpp"
#include "saber/verdict.hpp"

namespace saber {

// Stage-1 relation label plus stage-2 intensity: alignment strength for
// consistent clips, conflict severity for inconsistent ones.
struct ConsistencyAssessment {
  std::string clip_id;
  Relation relation = Relation::consistent;
  int intensity = 0;  // 0..10

  bool operator==(const ConsistencyAssessment&) const = default;
};

inline constexpr std::string_view kDefaultRelationRubric =
    "You are given a six-dimension annotation of a video clip. Decide whether\n"
    "the acoustic cues and the visual cues point to the same emotional state\n"
    "(consistent) or to conflicting states (inconsistent).\n"
    "Reply with a single line: relation: consistent|inconsistent\n";

inline constexpr std::string_view kDefaultIntensityRubric =
    "The clip below was classified as {relation}. Assign an integer intensity\n"
    "from 0 to 10: for consistent clips the strength of cross-modal alignment,\n"
    "for inconsistent clips the severity of the conflict.\n"
    "Reply with a single line: score: <integer 0-10>\n";

// Two-stage protocol, two judge requests in order: stage 1 returns the
// relation, stage 2 the 0-10 intensity with the stage-1 verdict named in its
// rubric ({relation} placeholder). Throws UnparseableVerdict (out-of-range
// intensity included) and client errors.
ConsistencyAssessment assess_consistency(ChatClient& judge,
                                         const SixDimAnnotation& annotation,
                                         std::string_view relation_rubric = kDefaultRelationRubric,
                                         std::string_view intensity_rubric = kDefaultIntensityRubric);

// Balanced diagnostic test set: clip ids per subset.
struct TestSet {
  std::vector<std::string> consistent_subset;
  std::vector<std::string> inconsistent_subset;
};

// Ranks each relation class by intensity descending (ties by clip_id
// ascending) and keeps the top total/2 per class. Throws Error on odd or
// non-positive total, InsufficientSamples when a class is short.
TestSet assemble_test_set(const std::vector<ConsistencyAssessment>& assessments,
                          int total = 1800);

// On-disk record of a test-set manifest.
struct TestSetEntry {
  std::string clip_id;
  Relation subset = Relation::consistent;

  bool operator==(const TestSetEntry&) const = default;
};

Manifest<TestSetEntry> test_set_to_manifest(const TestSet& ts);

}  // namespace saber
