// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "saber/qa.hpp"
#include "saber/synthetic.hpp"
#include "test_util.hpp"

using namespace saber;
using saber::testutil::TempDir;

namespace {

// Independent full-matrix edit distance, deliberately not the production
// single-row formulation.
double oracle_wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::size_t n = ref.size();
  std::size_t m = hyp.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  return static_cast<double>(d[n][m]) / static_cast<double>(n);
}

Transcript t_en(const std::string& id, const std::string& text,
                TranscriptSource src = TranscriptSource::asr) {
  return make_transcript(id, text, src, Language::EN);
}

}  // namespace

TEST_CASE("EN tokenization lowercases, strips edge punctuation, collapses space") {
  auto tokens = normalize_tokens("  The speaker, pausing -- said \"Hello!\"  ", Language::EN);
  CHECK(tokens == std::vector<std::string>{"the", "speaker", "pausing", "said", "hello"});
}

TEST_CASE("EN tokenization keeps interior punctuation") {
  auto tokens = normalize_tokens("it's mid-sentence o'clock.", Language::EN);
  CHECK(tokens == std::vector<std::string>{"it's", "mid-sentence", "o'clock"});
}

TEST_CASE("tokens made only of punctuation vanish") {
  auto tokens = normalize_tokens("well ... yes", Language::EN);
  CHECK(tokens == std::vector<std::string>{"well", "yes"});
}

TEST_CASE("CN tokenization is per code point with ASCII runs intact") {
  auto tokens = normalize_tokens("我说Hello世界", Language::CN);
  CHECK(tokens == std::vector<std::string>{"我", "说", "hello", "世", "界"});
}

TEST_CASE("CN tokenization drops CJK punctuation and splits on space") {
  auto tokens = normalize_tokens("你好，世界 ok", Language::CN);
  CHECK(tokens == std::vector<std::string>{"你", "好", "世", "界", "ok"});
}

TEST_CASE("tokenization is idempotent") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    std::string text = synthetic_transcript_text("clip_" + std::to_string(i),
                                                 i % 3 == 0 ? Language::CN : Language::EN,
                                                 99);
    Language lang = i % 3 == 0 ? Language::CN : Language::EN;
    auto once = normalize_tokens(text, lang);
    std::string joined;
    for (std::size_t w = 0; w < once.size(); ++w) {
      if (w > 0) joined += ' ';
      joined += once[w];
    }
    CHECK(normalize_tokens(joined, lang) == once);
  }
}

TEST_CASE("wer basics") {
  CHECK(word_error_rate(t_en("c", "a b c"), t_en("c", "a b c")) == 0.0);
  CHECK(word_error_rate(t_en("c", "a b c"), t_en("c", "a x c")) == doctest::Approx(1.0 / 3));
  CHECK(word_error_rate(t_en("c", "a b c"), t_en("c", "b c")) == doctest::Approx(1.0 / 3));
  CHECK(word_error_rate(t_en("c", "a b c"), t_en("c", "a b c d")) == doctest::Approx(1.0 / 3));
  // hypothesis longer than reference: rate above one
  CHECK(word_error_rate(t_en("c", "a"), t_en("c", "x y z")) == 3.0);
  // empty hypothesis: all deletions
  CHECK(word_error_rate(t_en("c", "a b"), t_en("c", "")) == 1.0);
}

TEST_CASE("wer requires a non-empty reference") {
  CHECK_THROWS_AS(word_error_rate(t_en("c", "..."), t_en("c", "a")), EmptyReference);
}

TEST_CASE("wer is insensitive to case and edge punctuation") {
  CHECK(word_error_rate(t_en("c", "The End."), t_en("c", "the end")) == 0.0);
}

TEST_CASE("wer matches the full-matrix oracle on random instances") {
  std::mt19937_64 rng(20260819);
  const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee"};
  for (int i = 0; i < 300; ++i) {
    std::size_t ref_len = 1 + rng() % 20;
    std::size_t hyp_len = rng() % 21;
    std::vector<std::string> ref_words, hyp_words;
    std::string ref_text, hyp_text;
    for (std::size_t w = 0; w < ref_len; ++w) {
      ref_words.push_back(vocab[rng() % vocab.size()]);
      if (w > 0) ref_text += ' ';
      ref_text += ref_words.back();
    }
    for (std::size_t w = 0; w < hyp_len; ++w) {
      hyp_words.push_back(vocab[rng() % vocab.size()]);
      if (w > 0) hyp_text += ' ';
      hyp_text += hyp_words.back();
    }
    CHECK(word_error_rate(t_en("c", ref_text), t_en("c", hyp_text)) ==
          oracle_wer(ref_words, hyp_words));
  }
}

TEST_CASE("wer filter keeps matching annotations and reports the rest") {
  Manifest<SixDimAnnotation> anns;
  anns.stage = Stage::annotated;
  SixDimAnnotation good;
  good.clip_id = "g";
  good.speech_content = "the quick fox";
  SixDimAnnotation bad;
  bad.clip_id = "b";
  bad.speech_content = "completely different words here";
  for (auto* a : {&good, &bad}) {
    a->video_description = "v";
    a->acoustic_features = "ac";
    a->facial_expression = "f";
    a->body_language = "bl";
    a->comprehensive_reasoning = "r";
  }
  anns.records = {good, bad};

  std::map<std::string, Transcript> transcripts;
  transcripts.emplace("g", t_en("g", "the quick fox"));
  transcripts.emplace("b", t_en("b", "the quick fox"));

  QaThresholds t;
  t.max_wer = 0.3;
  WerFilterResult r = filter_by_wer(anns, transcripts, t);
  CHECK(r.kept.stage == Stage::annotated);
  REQUIRE(r.kept.records.size() == 1);
  CHECK(r.kept.records[0].clip_id == "g");
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].annotation.clip_id == "b");
  CHECK(r.rejected[0].wer > 0.3);
}

TEST_CASE("wer filter boundary is inclusive") {
  Manifest<SixDimAnnotation> anns;
  anns.stage = Stage::annotated;
  SixDimAnnotation a;
  a.clip_id = "c";
  a.speech_content = "a b x d";  // one substitution in four words
  a.video_description = "v";
  a.acoustic_features = "ac";
  a.facial_expression = "f";
  a.body_language = "bl";
  a.comprehensive_reasoning = "r";
  anns.records = {a};
  std::map<std::string, Transcript> transcripts;
  transcripts.emplace("c", t_en("c", "a b c d"));

  QaThresholds t;
  t.max_wer = 0.25;
  CHECK(filter_by_wer(anns, transcripts, t).kept.records.size() == 1);
  t.max_wer = 0.24;
  CHECK(filter_by_wer(anns, transcripts, t).kept.records.empty());
}

TEST_CASE("wer filter requires a transcript per clip") {
  Manifest<SixDimAnnotation> anns;
  anns.stage = Stage::annotated;
  SixDimAnnotation a;
  a.clip_id = "missing";
  a.speech_content = "words";
  anns.records = {a};
  CHECK_THROWS_AS(filter_by_wer(anns, {}, QaThresholds{}), MissingTranscript);
}

TEST_CASE("transcripts load with per-record language override") {
  TempDir dir;
  auto p = dir.file("t.jsonl");
  testutil::spit(p,
                 "{\"clip_id\":\"a\",\"text\":\"Hello There\"}\n"
                 "{\"clip_id\":\"b\",\"text\":\"我说ok\",\"language\":\"cn\"}\n");
  auto m = load_transcripts(p, {{"a", Language::EN}});
  CHECK(m.at("a").words == std::vector<std::string>{"hello", "there"});
  CHECK(m.at("b").language == Language::CN);
  CHECK(m.at("b").words == std::vector<std::string>{"我", "说", "ok"});
}

TEST_CASE("transcript without any language source fails") {
  TempDir dir;
  auto p = dir.file("t.jsonl");
  testutil::spit(p, "{\"clip_id\":\"x\",\"text\":\"hi\"}\n");
  CHECK_THROWS_AS(load_transcripts(p, {}), MissingTranscript);
}

TEST_CASE("duplicate transcript ids are rejected") {
  TempDir dir;
  auto p = dir.file("t.jsonl");
  testutil::spit(p,
                 "{\"clip_id\":\"x\",\"text\":\"hi\",\"language\":\"en\"}\n"
                 "{\"clip_id\":\"x\",\"text\":\"ho\",\"language\":\"en\"}\n");
  CHECK_THROWS_AS(load_transcripts(p, {}), DuplicateId);
}

TEST_CASE("semantic check keeps scores at or above the threshold") {
  SixDimAnnotation a;
  a.clip_id = "c7";
  a.video_description = "a man waves from a doorway";

  QaThresholds t;
  t.min_semantic_score = 6;

  auto run = [&](const std::string& reply) {
    auto mock = std::make_shared<MockTransport>();
    mock->push_response(reply);
    ChatClient judge(mock, ClientConfig{});
    return semantic_consistency_check(judge, a, "someone waves at the door", t);
  };

  SemanticVerdict kept = run("score: 6");
  CHECK(kept.kept);
  CHECK(kept.score == 6);
  SemanticVerdict dropped = run("score: 5");
  CHECK_FALSE(dropped.kept);
  CHECK_THROWS_AS(run("score: 11"), OutOfRange);
  CHECK_THROWS_AS(run("no verdict"), UnparseableVerdict);
}

TEST_CASE("semantic check payload carries the clip marker and both descriptions") {
  SixDimAnnotation a;
  a.clip_id = "marked_clip";
  a.video_description = "annotation view";
  auto mock = std::make_shared<MockTransport>();
  mock->push_response("score: 8");
  ChatClient judge(mock, ClientConfig{});
  semantic_consistency_check(judge, a, "independent view", QaThresholds{});
  REQUIRE(mock->call_count() == 1);
  auto calls = mock->calls();  // calls() copies; never bind into the temporary
  const auto& call = calls[0];
  REQUIRE(call.messages.size() == 1);
  const std::string& payload = call.messages[0].content;
  CHECK(payload.find("clip_id: marked_clip") != std::string::npos);
  CHECK(payload.find("annotation view") != std::string::npos);
  CHECK(payload.find("independent view") != std::string::npos);
  CHECK(call.temperature == 0.0);
  CHECK(call.n == 1);
}

TEST_CASE("semantic check rejects an empty independent description") {
  SixDimAnnotation a;
  a.clip_id = "c";
  a.video_description = "v";
  auto mock = std::make_shared<MockTransport>();
  ChatClient judge(mock, ClientConfig{});
  CHECK_THROWS_AS(semantic_consistency_check(judge, a, "  ", QaThresholds{}), EmptyInput);
}

TEST_CASE("qa thresholds validate") {
  QaThresholds t;
  t.max_wer = -0.1;
  CHECK_THROWS_AS(validate(t), Error);
  t = QaThresholds{};
  t.min_semantic_score = 11;
  CHECK_THROWS_AS(validate(t), Error);
}

TEST_CASE("qa report csv") {
  TempDir dir;
  auto p = dir.file("report.csv");
  write_qa_report({{"a", 0.25, -1, true}, {"b", -1.0, 7, false}}, p);
  std::string text = testutil::slurp(p);
  CHECK(text.find("clip_id,wer,semantic_score,kept") == 0);
  CHECK(text.find("a,0.25,-1,true") != std::string::npos);
  CHECK(text.find("b,-1,7,false") != std::string::npos);
}
