// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saber/annotation.hpp"
#include "saber/clients.hpp"

namespace saber {

struct OverlapScore {
  double clue_overlap = 0.0;  // 0..10
  double label_overlap = 0.0;

  bool operator==(const OverlapScore&) const = default;
};

// Scores per dimension on the 0..3 scale: video description, speech content
// description, acoustic features description, facial expression, body
// language, comprehensive reasoning.
struct SixDimScores {
  double vd = 0.0;
  double scd = 0.0;
  double afd = 0.0;
  double fe = 0.0;
  double bl = 0.0;
  double ce = 0.0;

  bool operator==(const SixDimScores&) const = default;
};

inline constexpr std::array<std::string_view, 6> kSixDimShortNames = {
    "vd", "scd", "afd", "fe", "bl", "ce"};

double dimension_score(const SixDimScores& s, std::size_t index);
double& dimension_score(SixDimScores& s, std::size_t index);

inline constexpr std::string_view kDefaultOverlapRubric =
    "Compare the model response with the reference emotion annotation. Rate\n"
    "how much of the reference's evidence clues the response covers, and how\n"
    "well the emotional labels overlap, each on a 0-10 scale.\n"
    "Reply with: clue: <real 0-10> and label: <real 0-10>\n";

inline constexpr std::string_view kDefaultSixDimRubric =
    "Rate the response against the reference on the dimension\n"
    "\"{dimension}\" using a 0-3 scale: 0 absent or wrong, 1 partially\n"
    "correct, 2 mostly correct, 3 complete and faithful.\n"
    "Reply with a single line: score: <real 0-3>\n";

// One judge request; the reply carries `clue:` and `label:` lines, both in
// [0, 10]. Out-of-range values raise OutOfRange, never clamp.
OverlapScore score_overlap(ChatClient& judge, const std::string& reference,
                           const std::string& response,
                           std::string_view rubric = kDefaultOverlapRubric);

// Six judge requests, one per dimension ({dimension} substituted into the
// rubric), each replying `score:` in [0, 3]. The response is scored as
// given, parseable triplet or raw text.
SixDimScores score_six_dim(ChatClient& judge, const SixDimAnnotation& reference,
                           const std::string& response,
                           std::string_view rubric_template = kDefaultSixDimRubric);

// Fraction of exact matches after ASCII case-folding and whitespace
// trimming. Throws EmptyInput.
double aggregate_accuracy(const std::vector<std::pair<std::string, std::string>>& predictions);

// Per-dimension means on each subset and their exact differences
// (consistent - inconsistent).
struct RobustnessReport {
  SixDimScores consistent_mean;
  SixDimScores inconsistent_mean;
  SixDimScores delta;
  std::size_t n_consistent = 0;
  std::size_t n_inconsistent = 0;
};

RobustnessReport robustness_report(const std::vector<SixDimScores>& consistent_scores,
                                   const std::vector<SixDimScores>& inconsistent_scores);

// CSV row: clip_id plus scores.
void write_sixdim_csv(const std::vector<std::pair<std::string, SixDimScores>>& rows,
                      const std::filesystem::path& path);
std::vector<std::pair<std::string, SixDimScores>> read_sixdim_csv(
    const std::filesystem::path& path);

void write_overlap_csv(const std::vector<std::pair<std::string, OverlapScore>>& rows,
                       const std::filesystem::path& path);

void write_robustness_csv(const RobustnessReport& report, const std::filesystem::path& path);
std::string format_robustness_text(const RobustnessReport& report);

}  // namespace saber
