// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "saber/errors.hpp"

namespace saber {

struct DpoConfig {
  double beta = 0.1;          // deviation-penalty scale, must be > 0
  double learning_rate = 0.1;
  int steps = 0;
};

void validate(const DpoConfig& cfg);

// Sequence log-probabilities of a preference pair under the trained policy
// and the frozen reference.
struct PolicyLogProbs {
  double logp_w_policy = 0.0;
  double logp_w_ref = 0.0;
  double logp_l_policy = 0.0;
  double logp_l_ref = 0.0;
};

// Numerically stable -log sigmoid(z) = softplus(-z).
double neg_log_sigmoid(double z);

// Implicit-reward margin: beta * [(logp_w_policy - logp_w_ref)
//                                 - (logp_l_policy - logp_l_ref)].
double dpo_margin(const PolicyLogProbs& lp, double beta);

// Preference loss -log sigmoid(margin), computed via the softplus form.
// Throws NonFiniteInput if any log-prob or beta is not finite.
double dpo_loss(const PolicyLogProbs& lp, double beta);

// Row-major matrix, used for policy parameters and their gradients.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

// Per-position categorical policy over a fixed vocabulary: independent
// softmax at each of max_len positions, no parameter sharing. The smallest
// policy that exposes exact sequence log-probabilities.
class ToyPolicy {
 public:
  ToyPolicy() = default;
  ToyPolicy(std::size_t max_len, std::size_t vocab, double fill = 0.0)
      : logits_(max_len, vocab, fill) {}

  static ToyPolicy random(std::size_t max_len, std::size_t vocab,
                          std::uint64_t seed, double scale = 1.0);

  std::size_t max_len() const { return logits_.rows; }
  std::size_t vocab() const { return logits_.cols; }
  Matrix& logits() { return logits_; }
  const Matrix& logits() const { return logits_; }

  // softmax probabilities of one position
  std::vector<double> position_probs(std::size_t t) const;

  bool operator==(const ToyPolicy&) const = default;

 private:
  Matrix logits_;
};

// Sum over positions of log softmax(logits[t])[tokens[t]].
// Throws TokenOutOfRange if the sequence is longer than max_len or any id
// is outside the vocabulary.
double toy_policy_logprob(const ToyPolicy& p, std::span<const int> tokens);

struct TokenPair {
  std::vector<int> winner;
  std::vector<int> loser;
};

// Analytic gradient of dpo_loss w.r.t. the policy logits for one pair, with
// the reference held fixed. Same shape as the policy's logit table.
Matrix dpo_gradient(const ToyPolicy& policy, const ToyPolicy& ref,
                    const TokenPair& pair, double beta);

// Mean loss / mean gradient / mean margin over a batch of pairs, combined by
// deterministic ordered summation.
double dpo_batch_loss(const ToyPolicy& policy, const ToyPolicy& ref,
                      const std::vector<TokenPair>& pairs, double beta);
Matrix dpo_batch_gradient(const ToyPolicy& policy, const ToyPolicy& ref,
                          const std::vector<TokenPair>& pairs, double beta);
double dpo_batch_margin(const ToyPolicy& policy, const ToyPolicy& ref,
                        const std::vector<TokenPair>& pairs, double beta);

// Mean sequence NLL over a corpus of token sequences.
double sft_loss(const ToyPolicy& p, const std::vector<std::vector<int>>& corpus);
Matrix sft_gradient(const ToyPolicy& p, const std::vector<std::vector<int>>& corpus);

struct SftResult {
  ToyPolicy policy;
  std::vector<double> curve;  // loss before each update; empty when steps == 0
  double final_loss = 0.0;
};

// Plain gradient descent on mean sequence NLL. cfg.steps updates at
// cfg.learning_rate; curve[i] is the loss before update i.
SftResult train_toy_sft(ToyPolicy p, const std::vector<std::vector<int>>& corpus,
                        const DpoConfig& cfg);

struct DpoCurvePoint {
  double loss = 0.0;
  double margin = 0.0;
};

struct DpoTrainResult {
  ToyPolicy policy;
  std::vector<DpoCurvePoint> curve;  // metrics before each update
  double final_loss = 0.0;
  double final_margin = 0.0;
};

// Gradient descent on mean dpo_loss with a frozen reference. Throws Error
// on an empty pair list.
DpoTrainResult train_toy_dpo(ToyPolicy p, const ToyPolicy& ref,
                             const std::vector<TokenPair>& pairs,
                             const DpoConfig& cfg);

// Maps text onto toy token ids: byte value modulo vocab, truncated to
// max_len. Lets desk-scale training consume real preference manifests.
std::vector<int> toy_tokenize(std::string_view text, std::size_t vocab,
                              std::size_t max_len);

// Text serialization of a policy table: header line "<rows> <cols>", then
// one row of 17-significant-digit decimals per line. Round-trips doubles.
void save_policy(const ToyPolicy& p, const std::filesystem::path& path);
ToyPolicy load_policy(const std::filesystem::path& path);

// Training curves as CSV.
void write_sft_curve_csv(const SftResult& r, const std::filesystem::path& path);
void write_dpo_curve_csv(const DpoTrainResult& r, const std::filesystem::path& path);

// Central finite-difference check of dpo_gradient on seeded random
// instances. Relative error per instance is ||analytic - fd||_inf divided by
// max(||analytic||_inf, 1e-12).
struct GradCheckResult {
  std::vector<double> relative_errors;  // one per instance
  double max_relative_error = 0.0;
};

GradCheckResult check_dpo_gradients(int instances, std::uint64_t seed,
                                    double epsilon = 1e-4);

}  // namespace saber
