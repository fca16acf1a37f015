// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace saber {
namespace {

// mt19937_64 raw output is pinned by the standard; distributions are not,
// so every derived draw below goes through these helpers.
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

void check_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw NonFiniteInput(field);
}

double log_sum_exp_row(const Matrix& logits, std::size_t t) {
  double m = logits.at(t, 0);
  for (std::size_t v = 1; v < logits.cols; ++v) m = std::max(m, logits.at(t, v));
  double sum = 0.0;
  for (std::size_t v = 0; v < logits.cols; ++v) sum += std::exp(logits.at(t, v) - m);
  return m + std::log(sum);
}

PolicyLogProbs pair_logprobs(const ToyPolicy& policy, const ToyPolicy& ref,
                             const TokenPair& pair) {
  PolicyLogProbs lp;
  lp.logp_w_policy = toy_policy_logprob(policy, pair.winner);
  lp.logp_w_ref = toy_policy_logprob(ref, pair.winner);
  lp.logp_l_policy = toy_policy_logprob(policy, pair.loser);
  lp.logp_l_ref = toy_policy_logprob(ref, pair.loser);
  return lp;
}

}  // namespace

void validate(const DpoConfig& cfg) {
  if (!std::isfinite(cfg.beta) || cfg.beta <= 0.0) throw Error("beta must be > 0");
  if (!std::isfinite(cfg.learning_rate) || cfg.learning_rate <= 0.0) {
    throw Error("learning rate must be > 0");
  }
  if (cfg.steps < 0) throw Error("steps must be >= 0");
}

double neg_log_sigmoid(double z) {
  // softplus(-z), split to avoid overflow on either side
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double dpo_margin(const PolicyLogProbs& lp, double beta) {
  return beta * ((lp.logp_w_policy - lp.logp_w_ref) - (lp.logp_l_policy - lp.logp_l_ref));
}

double dpo_loss(const PolicyLogProbs& lp, double beta) {
  check_finite(lp.logp_w_policy, "logp_w_policy");
  check_finite(lp.logp_w_ref, "logp_w_ref");
  check_finite(lp.logp_l_policy, "logp_l_policy");
  check_finite(lp.logp_l_ref, "logp_l_ref");
  check_finite(beta, "beta");
  return neg_log_sigmoid(dpo_margin(lp, beta));
}

ToyPolicy ToyPolicy::random(std::size_t max_len, std::size_t vocab, std::uint64_t seed,
                            double scale) {
  ToyPolicy p(max_len, vocab);
  std::mt19937_64 rng(seed);
  for (double& x : p.logits_.data) x = (2.0 * unit_double(rng) - 1.0) * scale;
  return p;
}

std::vector<double> ToyPolicy::position_probs(std::size_t t) const {
  if (t >= logits_.rows) throw Error("position outside policy length");
  double lse = log_sum_exp_row(logits_, t);
  std::vector<double> probs(logits_.cols);
  for (std::size_t v = 0; v < logits_.cols; ++v) probs[v] = std::exp(logits_.at(t, v) - lse);
  return probs;
}

double toy_policy_logprob(const ToyPolicy& p, std::span<const int> tokens) {
  if (tokens.size() > p.max_len()) {
    throw TokenOutOfRange(p.max_len(), tokens[p.max_len()]);
  }
  double logp = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    int tok = tokens[t];
    if (tok < 0 || static_cast<std::size_t>(tok) >= p.vocab()) throw TokenOutOfRange(t, tok);
    logp += p.logits().at(t, static_cast<std::size_t>(tok)) - log_sum_exp_row(p.logits(), t);
  }
  return logp;
}

Matrix dpo_gradient(const ToyPolicy& policy, const ToyPolicy& ref, const TokenPair& pair,
                    double beta) {
  PolicyLogProbs lp = pair_logprobs(policy, ref, pair);
  double coeff = (sigmoid(dpo_margin(lp, beta)) - 1.0) * beta;

  Matrix grad(policy.max_len(), policy.vocab());
  for (std::size_t t = 0; t < policy.max_len(); ++t) {
    bool in_w = t < pair.winner.size();
    bool in_l = t < pair.loser.size();
    if (!in_w && !in_l) continue;
    std::vector<double> probs = policy.position_probs(t);
    for (std::size_t v = 0; v < policy.vocab(); ++v) {
      double dw = in_w ? ((static_cast<std::size_t>(pair.winner[t]) == v ? 1.0 : 0.0) - probs[v])
                       : 0.0;
      double dl = in_l ? ((static_cast<std::size_t>(pair.loser[t]) == v ? 1.0 : 0.0) - probs[v])
                       : 0.0;
      grad.at(t, v) = coeff * (dw - dl);
    }
  }
  return grad;
}

double dpo_batch_loss(const ToyPolicy& policy, const ToyPolicy& ref,
                      const std::vector<TokenPair>& pairs, double beta) {
  if (pairs.empty()) throw Error("no preference pairs");
  double sum = 0.0;
  for (const TokenPair& pair : pairs) sum += dpo_loss(pair_logprobs(policy, ref, pair), beta);
  return sum / static_cast<double>(pairs.size());
}

Matrix dpo_batch_gradient(const ToyPolicy& policy, const ToyPolicy& ref,
                          const std::vector<TokenPair>& pairs, double beta) {
  if (pairs.empty()) throw Error("no preference pairs");
  Matrix acc(policy.max_len(), policy.vocab());
  for (const TokenPair& pair : pairs) {
    Matrix g = dpo_gradient(policy, ref, pair, beta);
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
  }
  double inv = 1.0 / static_cast<double>(pairs.size());
  for (double& x : acc.data) x *= inv;
  return acc;
}

double dpo_batch_margin(const ToyPolicy& policy, const ToyPolicy& ref,
                        const std::vector<TokenPair>& pairs, double beta) {
  if (pairs.empty()) throw Error("no preference pairs");
  double sum = 0.0;
  for (const TokenPair& pair : pairs) sum += dpo_margin(pair_logprobs(policy, ref, pair), beta);
  return sum / static_cast<double>(pairs.size());
}

double sft_loss(const ToyPolicy& p, const std::vector<std::vector<int>>& corpus) {
  if (corpus.empty()) throw Error("empty corpus");
  double sum = 0.0;
  for (const auto& seq : corpus) sum -= toy_policy_logprob(p, seq);
  return sum / static_cast<double>(corpus.size());
}

Matrix sft_gradient(const ToyPolicy& p, const std::vector<std::vector<int>>& corpus) {
  if (corpus.empty()) throw Error("empty corpus");
  Matrix grad(p.max_len(), p.vocab());
  for (const auto& seq : corpus) {
    for (std::size_t t = 0; t < seq.size() && t < p.max_len(); ++t) {
      std::vector<double> probs = p.position_probs(t);
      for (std::size_t v = 0; v < p.vocab(); ++v) {
        grad.at(t, v) += probs[v] - (static_cast<std::size_t>(seq[t]) == v ? 1.0 : 0.0);
      }
    }
  }
  double inv = 1.0 / static_cast<double>(corpus.size());
  for (double& x : grad.data) x *= inv;
  return grad;
}

SftResult train_toy_sft(ToyPolicy p, const std::vector<std::vector<int>>& corpus,
                        const DpoConfig& cfg) {
  validate(cfg);
  SftResult r;
  for (int step = 0; step < cfg.steps; ++step) {
    r.curve.push_back(sft_loss(p, corpus));
    Matrix g = sft_gradient(p, corpus);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      p.logits().data[i] -= cfg.learning_rate * g.data[i];
    }
  }
  r.final_loss = sft_loss(p, corpus);
  r.policy = std::move(p);
  return r;
}

DpoTrainResult train_toy_dpo(ToyPolicy p, const ToyPolicy& ref,
                             const std::vector<TokenPair>& pairs, const DpoConfig& cfg) {
  validate(cfg);
  if (pairs.empty()) throw Error("no preference pairs");
  DpoTrainResult r;
  for (int step = 0; step < cfg.steps; ++step) {
    r.curve.push_back({dpo_batch_loss(p, ref, pairs, cfg.beta),
                       dpo_batch_margin(p, ref, pairs, cfg.beta)});
    Matrix g = dpo_batch_gradient(p, ref, pairs, cfg.beta);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      p.logits().data[i] -= cfg.learning_rate * g.data[i];
    }
  }
  r.final_loss = dpo_batch_loss(p, ref, pairs, cfg.beta);
  r.final_margin = dpo_batch_margin(p, ref, pairs, cfg.beta);
  r.policy = std::move(p);
  return r;
}

std::vector<int> toy_tokenize(std::string_view text, std::size_t vocab, std::size_t max_len) {
  if (vocab == 0) throw Error("vocabulary must be non-empty");
  std::vector<int> tokens;
  tokens.reserve(std::min(text.size(), max_len));
  for (std::size_t i = 0; i < text.size() && i < max_len; ++i) {
    tokens.push_back(static_cast<int>(static_cast<unsigned char>(text[i]) % vocab));
  }
  return tokens;
}

void save_policy(const ToyPolicy& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write policy file: " + path.string());
  out << p.max_len() << ' ' << p.vocab() << '\n';
  out << std::setprecision(17);
  for (std::size_t t = 0; t < p.max_len(); ++t) {
    for (std::size_t v = 0; v < p.vocab(); ++v) {
      if (v > 0) out << ' ';
      out << p.logits().at(t, v);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

ToyPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read policy file: " + path.string());
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(in >> rows >> cols)) throw Error("bad policy header: " + path.string());
  ToyPolicy p(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    if (!(in >> p.logits().data[i])) throw Error("truncated policy file: " + path.string());
  }
  return p;
}

void write_sft_curve_csv(const SftResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write curve file: " + path.string());
  out << "step,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.curve.size(); ++i) out << i << ',' << r.curve[i] << '\n';
  out << r.curve.size() << ',' << r.final_loss << '\n';
}

void write_dpo_curve_csv(const DpoTrainResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write curve file: " + path.string());
  out << "step,loss,margin\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    out << i << ',' << r.curve[i].loss << ',' << r.curve[i].margin << '\n';
  }
  out << r.curve.size() << ',' << r.final_loss << ',' << r.final_margin << '\n';
}

GradCheckResult check_dpo_gradients(int instances, std::uint64_t seed, double epsilon) {
  if (instances < 1) throw Error("instance count must be >= 1");
  if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
  std::mt19937_64 rng(seed);
  GradCheckResult result;
  result.relative_errors.reserve(static_cast<std::size_t>(instances));

  for (int i = 0; i < instances; ++i) {
    std::size_t max_len = 1 + draw_index(rng, 8);   // T <= 8
    std::size_t vocab = 2 + draw_index(rng, 15);    // V <= 16
    ToyPolicy policy = ToyPolicy::random(max_len, vocab, rng(), 1.0);
    ToyPolicy ref = ToyPolicy::random(max_len, vocab, rng(), 1.0);
    double beta = 0.05 + 1.95 * unit_double(rng);

    TokenPair pair;
    pair.winner.resize(1 + draw_index(rng, max_len));
    pair.loser.resize(1 + draw_index(rng, max_len));
    for (int& t : pair.winner) t = static_cast<int>(draw_index(rng, vocab));
    for (int& t : pair.loser) t = static_cast<int>(draw_index(rng, vocab));

    Matrix analytic = dpo_gradient(policy, ref, pair, beta);

    double max_abs_diff = 0.0;
    double max_abs_analytic = 0.0;
    for (std::size_t t = 0; t < max_len; ++t) {
      for (std::size_t v = 0; v < vocab; ++v) {
        ToyPolicy plus = policy;
        plus.logits().at(t, v) += epsilon;
        ToyPolicy minus = policy;
        minus.logits().at(t, v) -= epsilon;
        double fd = (dpo_loss(pair_logprobs(plus, ref, pair), beta) -
                     dpo_loss(pair_logprobs(minus, ref, pair), beta)) /
                    (2.0 * epsilon);
        max_abs_diff = std::max(max_abs_diff, std::abs(analytic.at(t, v) - fd));
        max_abs_analytic = std::max(max_abs_analytic, std::abs(analytic.at(t, v)));
      }
    }
    double rel = max_abs_diff / std::max(max_abs_analytic, 1e-12);
    result.relative_errors.push_back(rel);
    result.max_relative_error = std::max(result.max_relative_error, rel);
  }
  return result;
}

}  // namespace saber
