// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "saber/clients.hpp"
#include "saber/verdict.hpp"

namespace saber {

struct SamplingConfig {
  int k = 10;               // >= 4: two winners and two losers
  double temperature = 0.8;
};

void validate(const SamplingConfig& cfg);

// One winner/loser pair. Texts are serialized triplets when the candidate
// parsed; losers may be raw unparseable text (ranked with score -inf).
struct PreferencePair {
  std::string input_id;
  std::string winner;
  std::string loser;
  double winner_score = 0.0;
  double loser_score = 0.0;

  bool operator==(const PreferencePair&) const = default;
};

inline constexpr std::string_view kDefaultSamplingInstruction =
    "Analyze the referenced clip and reply in the tagged evidence format:\n"
    "[VISUAL_EVIDENCE], then [ACOUSTIC_EVIDENCE], then [REASONING], each tag\n"
    "on its own line followed by that section's text.\n";

inline constexpr std::string_view kDefaultPreferenceRubric =
    "Score each candidate response for logical consistency and evidence\n"
    "alignment: conclusions must follow from the stated visual and acoustic\n"
    "evidence, reconciling the cues rather than ignoring one modality.\n"
    "Reply with one line per candidate, in candidate order:\n"
    "score: <real 0-10>\n";

// Requests exactly cfg.k completions at cfg.temperature. Unparseable
// triplets are retained as raw text; they may become losers downstream.
std::vector<std::string> sample_candidates(ChatClient& gen, const std::string& input_id,
                                           const SamplingConfig& cfg,
                                           const std::string& prompt_context = "");

// Judges all candidates in one batched request (one `score:` line each, in
// order), overrides candidates that fail triplet parsing with -inf, sorts by
// score descending with ties broken by candidate index, and emits the 2x2
// cross product of the two highest against the two lowest: (w1,l1) (w1,l2)
// (w2,l1) (w2,l2) with l1 the lowest-ranked. Throws DegenerateScores when
// all effective scores are identical; pairs whose winner and loser texts
// coincide are dropped.
std::vector<PreferencePair> build_preference_pairs(ChatClient& judge,
                                                   const std::string& input_id,
                                                   const std::vector<std::string>& candidates,
                                                   std::string_view rubric = kDefaultPreferenceRubric);

struct PreferenceInput {
  std::string input_id;
  Relation relation = Relation::consistent;
  std::string prompt_context;
};

// Enforces equal counts of consistent and inconsistent inputs by truncating
// the tail of the larger class; input order is otherwise preserved.
std::vector<PreferenceInput> balance_by_relation(std::vector<PreferenceInput> inputs);

}  // namespace saber
