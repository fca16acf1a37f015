// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/sed.hpp"

#include <array>
#include <string_view>

#include "textutil.hpp"

namespace saber {
namespace {

constexpr std::array<std::string_view, 3> kTags = {kVisualTag, kAcousticTag, kReasoningTag};
constexpr std::array<std::string_view, 3> kSegmentNames = {"visual_evidence",
                                                           "acoustic_evidence", "reasoning"};

int tag_index(std::string_view trimmed_line) {
  for (int i = 0; i < 3; ++i) {
    if (trimmed_line == kTags[i]) return i;
  }
  return -1;
}

}  // namespace

std::string serialize_triplet(const SedTriplet& t) {
  const std::array<const std::string*, 3> segments = {&t.visual_evidence,
                                                      &t.acoustic_evidence, &t.reasoning};
  for (int i = 0; i < 3; ++i) {
    if (detail::trim(*segments[i]).empty()) throw EmptySegment(std::string(kSegmentNames[i]));
  }
  std::string out;
  for (int i = 0; i < 3; ++i) {
    out += kTags[i];
    out += '\n';
    out += *segments[i];
    out += '\n';
  }
  return out;
}

SedTriplet parse_triplet(const std::string& s) {
  std::array<std::vector<std::string_view>, 3> section_lines;
  std::vector<int> found;  // tag occurrences in encounter order
  int current = -1;        // lines before the first tag are preamble

  for (std::string_view line : detail::split_lines(s)) {
    int tag = tag_index(detail::trim(line));
    if (tag >= 0) {
      found.push_back(tag);
      current = tag;
      // a repeated tag restarts its section; duplication is rejected below
      continue;
    }
    if (current >= 0) section_lines[static_cast<std::size_t>(current)].push_back(line);
  }

  std::array<int, 3> counts = {0, 0, 0};
  for (int tag : found) ++counts[static_cast<std::size_t>(tag)];
  for (int i = 0; i < 3; ++i) {
    if (counts[static_cast<std::size_t>(i)] == 0)
      throw MissingSection(std::string(kSegmentNames[static_cast<std::size_t>(i)]));
  }
  for (int i = 0; i < 3; ++i) {
    if (counts[static_cast<std::size_t>(i)] > 1)
      throw DuplicateSection(std::string(kSegmentNames[static_cast<std::size_t>(i)]));
  }
  if (found != std::vector<int>{0, 1, 2}) {
    std::string order;
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (i > 0) order += ' ';
      order += kTags[static_cast<std::size_t>(found[i])];
    }
    throw OutOfOrder(order);
  }

  SedTriplet t;
  std::array<std::string*, 3> segments = {&t.visual_evidence, &t.acoustic_evidence,
                                          &t.reasoning};
  for (int i = 0; i < 3; ++i) {
    std::string joined;
    const auto& lines = section_lines[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (j > 0) joined += '\n';
      joined += lines[j];
    }
    std::string_view trimmed = detail::trim(joined);
    if (trimmed.empty()) throw EmptySegment(std::string(kSegmentNames[static_cast<std::size_t>(i)]));
    *segments[static_cast<std::size_t>(i)] = std::string(trimmed);
  }
  return t;
}

void validate_scored_sequence(const ScoredSequence& seq) {
  if (seq.tokens.size() != seq.token_logprobs.size()) {
    throw Error("scored sequence: " + std::to_string(seq.tokens.size()) + " tokens vs " +
                std::to_string(seq.token_logprobs.size()) + " logprobs");
  }
  const auto& b = seq.segment_bounds;
  if (b[0].begin != 0 || b[2].end != seq.tokens.size() || b[0].end != b[1].begin ||
      b[1].end != b[2].begin || b[0].begin > b[0].end || b[1].begin > b[1].end ||
      b[2].begin > b[2].end) {
    throw Error("scored sequence: segment bounds do not partition the token list");
  }
}

double sequence_nll(const ScoredSequence& seq) {
  validate_scored_sequence(seq);
  double nll = 0.0;
  for (std::size_t t = 0; t < seq.token_logprobs.size(); ++t) {
    if (seq.token_logprobs[t] > 0.0) throw PositiveLogProb(t);
    nll -= seq.token_logprobs[t];
  }
  return nll;
}

FactorizedNll factorized_nll(const ScoredSequence& seq) {
  validate_scored_sequence(seq);
  FactorizedNll out;
  std::array<double*, 3> sums = {&out.visual, &out.acoustic, &out.reasoning};
  // The total accumulates over all tokens in index order, exactly like
  // sequence_nll, so the two agree bit for bit. Segment sums accumulate
  // independently.
  for (std::size_t s = 0; s < 3; ++s) {
    const SegmentBounds& b = seq.segment_bounds[s];
    for (std::size_t t = b.begin; t < b.end; ++t) {
      if (seq.token_logprobs[t] > 0.0) throw PositiveLogProb(t);
      *sums[s] -= seq.token_logprobs[t];
      out.total -= seq.token_logprobs[t];
    }
  }
  return out;
}

}  // namespace saber
