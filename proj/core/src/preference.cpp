// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "saber/sed.hpp"

namespace saber {

void validate(const SamplingConfig& cfg) {
  if (cfg.k < 4) throw Error("sampling k must be >= 4 (two winners, two losers)");
  if (!std::isfinite(cfg.temperature) || cfg.temperature < 0.0) {
    throw Error("sampling temperature must be a finite non-negative real");
  }
}

std::vector<std::string> sample_candidates(ChatClient& gen, const std::string& input_id,
                                           const SamplingConfig& cfg,
                                           const std::string& prompt_context) {
  validate(cfg);
  std::string prompt = "clip_id: " + input_id + "\n";
  if (!prompt_context.empty()) {
    prompt += prompt_context;
    if (prompt_context.back() != '\n') prompt += '\n';
  }
  std::vector<ChatMessage> messages = {{"user", prompt}};
  return gen.generate(std::string(kDefaultSamplingInstruction), messages, cfg.temperature,
                      cfg.k);
}

std::vector<PreferencePair> build_preference_pairs(ChatClient& judge,
                                                   const std::string& input_id,
                                                   const std::vector<std::string>& candidates,
                                                   std::string_view rubric) {
  if (candidates.size() < 4) {
    throw Error("need at least 4 candidates, got " + std::to_string(candidates.size()));
  }

  std::string payload = "clip_id: " + input_id + "\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    payload += "\ncandidate " + std::to_string(i + 1) + ":\n" + candidates[i] + "\n";
  }
  std::string raw = judge.judge(std::string(rubric), payload);
  std::vector<double> scores =
      parse_verdict_numbers(raw, "score", candidates.size(), 0.0, 10.0);

  // a candidate that is not a well-formed triplet is ranked below everything
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      parse_triplet(candidates[i]);
    } catch (const Error&) {
      scores[i] = -std::numeric_limits<double>::infinity();
    }
  }

  bool all_same = std::all_of(scores.begin(), scores.end(),
                              [&](double s) { return s == scores.front(); });
  if (all_same) throw DegenerateScores(input_id);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  const std::size_t w1 = order[0];
  const std::size_t w2 = order[1];
  const std::size_t l1 = order[order.size() - 1];  // lowest ranked
  const std::size_t l2 = order[order.size() - 2];

  std::vector<PreferencePair> pairs;
  for (auto [w, l] : {std::pair{w1, l1}, std::pair{w1, l2}, std::pair{w2, l1},
                      std::pair{w2, l2}}) {
    if (candidates[w] == candidates[l]) continue;
    pairs.push_back({input_id, candidates[w], candidates[l], scores[w], scores[l]});
  }
  return pairs;
}

std::vector<PreferenceInput> balance_by_relation(std::vector<PreferenceInput> inputs) {
  std::size_t n_consistent = 0;
  std::size_t n_inconsistent = 0;
  for (const auto& in : inputs) {
    (in.relation == Relation::consistent ? n_consistent : n_inconsistent)++;
  }
  const std::size_t keep = std::min(n_consistent, n_inconsistent);

  std::vector<PreferenceInput> out;
  out.reserve(2 * keep);
  std::size_t kept_consistent = 0;
  std::size_t kept_inconsistent = 0;
  for (auto& in : inputs) {
    std::size_t& count =
        in.relation == Relation::consistent ? kept_consistent : kept_inconsistent;
    if (count < keep) {
      ++count;
      out.push_back(std::move(in));
    }
  }
  return out;
}

}  // namespace saber
