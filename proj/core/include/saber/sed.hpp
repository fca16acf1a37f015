// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "saber/errors.hpp"

namespace saber {

// Structured target sequence: visual evidence, then acoustic evidence, then
// the reasoning that synthesizes both. Serialized order is fixed.
struct SedTriplet {
  std::string visual_evidence;
  std::string acoustic_evidence;
  std::string reasoning;

  bool operator==(const SedTriplet&) const = default;
};

struct InstructionContext {
  std::string system_instruction;
};

inline constexpr const char* kVisualTag = "[VISUAL_EVIDENCE]";
inline constexpr const char* kAcousticTag = "[ACOUSTIC_EVIDENCE]";
inline constexpr const char* kReasoningTag = "[REASONING]";

// Emits the tagged text format, a public bit-exact contract:
//
//   [VISUAL_EVIDENCE]
//   <visual text>
//   [ACOUSTIC_EVIDENCE]
//   <acoustic text>
//   [REASONING]
//   <reasoning text>
//
// Each tag sits alone on its line; section text runs until the next tag.
// Throws EmptySegment if any segment is empty.
std::string serialize_triplet(const SedTriplet& t);

// Inverse of serialize_triplet. A line whose trimmed content equals a tag is
// a section delimiter; text before the first tag is ignored; section text is
// trimmed of leading/trailing whitespace. Error precedence: MissingSection
// (first missing tag in canonical order), then DuplicateSection, then
// OutOfOrder (message carries the order found), then EmptySegment for a
// section with no text. Round trips are the identity on triplets whose
// segments are trimmed and contain no tag lines.
SedTriplet parse_triplet(const std::string& s);

// Half-open token index range.
struct SegmentBounds {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SegmentBounds&) const = default;
};

// A token sequence with per-token natural-log probabilities and the three
// contiguous segment ranges (visual, acoustic, reasoning) that partition it.
struct ScoredSequence {
  std::vector<int> tokens;
  std::vector<double> token_logprobs;
  std::array<SegmentBounds, 3> segment_bounds{};
};

// Throws Error on shape violations (length mismatch, non-contiguous or
// non-covering segment bounds).
void validate_scored_sequence(const ScoredSequence& seq);

// Negative log-likelihood: -sum of token_logprobs, accumulated in token
// index order. Throws PositiveLogProb(index) if any entry is > 0.
double sequence_nll(const ScoredSequence& seq);

struct FactorizedNll {
  double visual = 0.0;
  double acoustic = 0.0;
  double reasoning = 0.0;
  double total = 0.0;
};

// Per-segment NLL sums plus the total. The total is accumulated over all
// tokens in index order, the same order as sequence_nll, so the two agree
// bit for bit; the per-segment sums are accumulated independently and add
// up to the total within rounding.
FactorizedNll factorized_nll(const ScoredSequence& seq);

}  // namespace saber
