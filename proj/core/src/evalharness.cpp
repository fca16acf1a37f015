// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/evalharness.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "saber/verdict.hpp"
#include "textutil.hpp"

namespace saber {

double dimension_score(const SixDimScores& s, std::size_t index) {
  switch (index) {
    case 0: return s.vd;
    case 1: return s.scd;
    case 2: return s.afd;
    case 3: return s.fe;
    case 4: return s.bl;
    case 5: return s.ce;
    default: throw Error("dimension index out of range");
  }
}

double& dimension_score(SixDimScores& s, std::size_t index) {
  switch (index) {
    case 0: return s.vd;
    case 1: return s.scd;
    case 2: return s.afd;
    case 3: return s.fe;
    case 4: return s.bl;
    case 5: return s.ce;
    default: throw Error("dimension index out of range");
  }
}

OverlapScore score_overlap(ChatClient& judge, const std::string& reference,
                           const std::string& response, std::string_view rubric) {
  if (detail::trim(reference).empty()) throw EmptyInput("reference");
  if (detail::trim(response).empty()) throw EmptyInput("response");
  std::string payload = "reference:\n" + reference + "\n\nresponse:\n" + response + "\n";
  std::string raw = judge.judge(std::string(rubric), payload);
  OverlapScore s;
  s.clue_overlap = parse_verdict_number(raw, "clue", 0.0, 10.0);
  s.label_overlap = parse_verdict_number(raw, "label", 0.0, 10.0);
  return s;
}

SixDimScores score_six_dim(ChatClient& judge, const SixDimAnnotation& reference,
                           const std::string& response, std::string_view rubric_template) {
  if (detail::trim(response).empty()) throw EmptyInput("response");
  SixDimScores scores;
  for (std::size_t d = 0; d < kDimensionNames.size(); ++d) {
    std::string rubric = render_template(
        rubric_template, {{"dimension", std::string(kDimensionNames[d])}});
    std::string payload = "clip_id: " + reference.clip_id + "\n\nreference ";
    payload += kDimensionNames[d];
    payload += ":\n" + dimension_field(reference, d) + "\n\nresponse:\n" + response + "\n";
    std::string raw = judge.judge(rubric, payload);
    dimension_score(scores, d) = parse_verdict_number(raw, "score", 0.0, 3.0);
  }
  return scores;
}

double aggregate_accuracy(
    const std::vector<std::pair<std::string, std::string>>& predictions) {
  if (predictions.empty()) throw EmptyInput("predictions");
  std::size_t hits = 0;
  for (const auto& [predicted, gold] : predictions) {
    if (detail::lower_ascii(detail::trim(predicted)) ==
        detail::lower_ascii(detail::trim(gold))) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

namespace {

SixDimScores mean_scores(const std::vector<SixDimScores>& scores) {
  SixDimScores mean;
  for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
    double sum = 0.0;
    for (const SixDimScores& s : scores) sum += dimension_score(s, d);
    dimension_score(mean, d) = sum / static_cast<double>(scores.size());
  }
  return mean;
}

}  // namespace

RobustnessReport robustness_report(const std::vector<SixDimScores>& consistent_scores,
                                   const std::vector<SixDimScores>& inconsistent_scores) {
  if (consistent_scores.empty()) throw EmptyInput("consistent scores");
  if (inconsistent_scores.empty()) throw EmptyInput("inconsistent scores");
  RobustnessReport r;
  r.consistent_mean = mean_scores(consistent_scores);
  r.inconsistent_mean = mean_scores(inconsistent_scores);
  for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
    dimension_score(r.delta, d) =
        dimension_score(r.consistent_mean, d) - dimension_score(r.inconsistent_mean, d);
  }
  r.n_consistent = consistent_scores.size();
  r.n_inconsistent = inconsistent_scores.size();
  return r;
}

void write_sixdim_csv(const std::vector<std::pair<std::string, SixDimScores>>& rows,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write csv: " + path.string());
  out << "clip_id";
  for (auto name : kSixDimShortNames) out << ',' << name;
  out << '\n' << std::setprecision(17);
  for (const auto& [id, s] : rows) {
    out << id;
    for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
      out << ',' << dimension_score(s, d);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::pair<std::string, SixDimScores>> read_sixdim_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read csv: " + path.string());
  std::vector<std::pair<std::string, SixDimScores>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line.rfind("clip_id,", 0) != 0) throw MalformedLine(1, "bad csv header");
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 1 + kSixDimShortNames.size()) {
      throw MalformedLine(line_number, "expected 7 fields");
    }
    SixDimScores s;
    for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
      const std::string& f = fields[d + 1];
      char* end = nullptr;
      double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || f.empty()) {
        throw MalformedLine(line_number, "bad number: " + f);
      }
      dimension_score(s, d) = v;
    }
    rows.emplace_back(fields[0], s);
  }
  return rows;
}

void write_overlap_csv(const std::vector<std::pair<std::string, OverlapScore>>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write csv: " + path.string());
  out << "id,clue_overlap,label_overlap\n" << std::setprecision(17);
  for (const auto& [id, s] : rows) {
    out << id << ',' << s.clue_overlap << ',' << s.label_overlap << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_robustness_csv(const RobustnessReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write csv: " + path.string());
  out << "dimension,consistent_mean,inconsistent_mean,delta\n" << std::setprecision(17);
  for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
    out << kSixDimShortNames[d] << ',' << dimension_score(report.consistent_mean, d) << ','
        << dimension_score(report.inconsistent_mean, d) << ','
        << dimension_score(report.delta, d) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::string format_robustness_text(const RobustnessReport& report) {
  std::string out = "robustness: consistent n=" + std::to_string(report.n_consistent) +
                    ", inconsistent n=" + std::to_string(report.n_inconsistent) + "\n";
  char buf[160];
  for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
    std::snprintf(buf, sizeof(buf), "%-3s consistent %.2f  inconsistent %.2f  delta %.2f\n",
                  std::string(kSixDimShortNames[d]).c_str(),
                  dimension_score(report.consistent_mean, d),
                  dimension_score(report.inconsistent_mean, d),
                  dimension_score(report.delta, d));
    out += buf;
  }
  return out;
}

}  // namespace saber
