// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "saber/alignment.hpp"
#include "saber/consistency.hpp"
#include "saber/qa.hpp"
#include "saber/sed.hpp"

namespace {

using namespace saber;

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> vocab = {
      "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"};
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(vocab[rng() % vocab.size()]);
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) s += ' ';
    s += words[i];
  }
  return s;
}

void bm_word_error_rate(benchmark::State& state) {
  std::mt19937_64 rng(20260819);
  const auto len = static_cast<std::size_t>(state.range(0));
  Transcript ref = make_transcript("r", join(random_words(rng, len)),
                                   TranscriptSource::asr, Language::EN);
  Transcript hyp = make_transcript("r", join(random_words(rng, len)),
                                   TranscriptSource::annotation, Language::EN);
  for (auto _ : state) {
    benchmark::DoNotOptimize(word_error_rate(ref, hyp));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_word_error_rate)->Range(8, 512)->Complexity();

void bm_parse_triplet(benchmark::State& state) {
  std::mt19937_64 rng(20260819);
  SedTriplet t;
  t.visual_evidence = join(random_words(rng, static_cast<std::size_t>(state.range(0))));
  t.acoustic_evidence = join(random_words(rng, static_cast<std::size_t>(state.range(0))));
  t.reasoning = join(random_words(rng, static_cast<std::size_t>(state.range(0))));
  std::string text = serialize_triplet(t);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_triplet(text));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(bm_parse_triplet)->Range(8, 256);

void bm_dpo_gradient(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const std::size_t vocab = 32;
  std::mt19937_64 rng(20260819);
  ToyPolicy policy = ToyPolicy::random(len, vocab, rng());
  ToyPolicy ref = ToyPolicy::random(len, vocab, rng());
  TokenPair pair;
  pair.winner.resize(len);
  pair.loser.resize(len);
  for (auto& x : pair.winner) x = static_cast<int>(rng() % vocab);
  for (auto& x : pair.loser) x = static_cast<int>(rng() % vocab);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpo_gradient(policy, ref, pair, 0.1));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_dpo_gradient)->Range(4, 64)->Complexity();

void bm_assemble_test_set(benchmark::State& state) {
  const int total = static_cast<int>(state.range(0));
  std::mt19937_64 rng(20260819);
  std::vector<ConsistencyAssessment> pool;
  pool.reserve(static_cast<std::size_t>(2 * total));
  for (int i = 0; i < 2 * total; ++i) {
    pool.push_back({"clip_" + std::to_string(i),
                    i % 2 == 0 ? Relation::consistent : Relation::inconsistent,
                    static_cast<int>(rng() % 11)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_test_set(pool, total));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_assemble_test_set)->Range(64, 4096)->Complexity();

}  // namespace

BENCHMARK_MAIN();
