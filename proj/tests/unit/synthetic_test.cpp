// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>

#include <doctest.h>

#include "saber/sed.hpp"
#include "saber/synthetic.hpp"
#include "test_util.hpp"

using namespace saber;
using namespace saber::testutil;

TEST_CASE("fnv-1a 64 matches published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("seeded hash separates tags, parts, and seeds") {
  CHECK(synth_hash(1, "t", "a", "b") == synth_hash(1, "t", "a", "b"));
  CHECK(synth_hash(1, "t", "a", "b") != synth_hash(2, "t", "a", "b"));
  CHECK(synth_hash(1, "t", "a", "b") != synth_hash(1, "u", "a", "b"));
  CHECK(synth_hash(1, "t", "a", "b") != synth_hash(1, "t", "b", "a"));
  // concatenation cannot collapse field boundaries
  CHECK(synth_hash(1, "t", "ab", "") != synth_hash(1, "t", "a", "b"));

  // low bits vary across related keys; a plain FNV-1a over these strings
  // collides systematically mod 4
  std::set<std::uint64_t> low;
  for (int i = 0; i < 16; ++i) {
    low.insert(synth_hash(7, "6d", "clip_" + std::to_string(i), "vd") % 4);
  }
  CHECK(low.size() > 1);
}

TEST_CASE("raw clip fixture pins boundaries and mixes defects") {
  FixtureSpec spec;
  spec.clip_count = 120;
  spec.seed = 20260819;
  Manifest<Clip> m = synthetic_raw_clips(spec);

  CHECK(m.stage == Stage::raw);
  REQUIRE(m.records.size() == 120);
  CHECK(m.records[0].duration_s == 0.5);
  CHECK(m.records[1].duration_s == 30.0);

  int too_short = 0;
  int too_long = 0;
  int low_res = 0;
  int no_track = 0;
  int noisy = 0;
  int cn = 0;
  std::set<std::string> ids;
  for (const Clip& c : m.records) {
    ids.insert(c.id);
    if (c.duration_s < 0.5) ++too_short;
    if (c.duration_s > 30.0) ++too_long;
    if (!c.resolution_ok) ++low_res;
    if (!c.has_audio_track) ++no_track;
    if (c.noise_flag) ++noisy;
    if (c.language == Language::CN) ++cn;
    CHECK(c.video_ref == "media/" + c.id + ".mp4");
    CHECK(c.audio_ref == "media/" + c.id + ".wav");
  }
  CHECK(ids.size() == 120);  // unique ids
  CHECK(too_short > 0);
  CHECK(too_long > 0);
  CHECK(low_res > 0);
  CHECK(no_track > 0);
  CHECK(noisy > 0);
  CHECK(cn > 0);
  CHECK(cn < 120);

  // pure function of its inputs
  Manifest<Clip> again = synthetic_raw_clips(spec);
  REQUIRE(again.records.size() == m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    CHECK(again.records[i] == m.records[i]);
  }

  spec.clip_count = 1;
  CHECK_THROWS_AS(synthetic_raw_clips(spec), Error);
}

TEST_CASE("transcript text tracks the clip language") {
  std::string en = synthetic_transcript_text("clip_en", Language::EN, 1);
  CHECK(en.find(' ') != std::string::npos);
  for (unsigned char c : en) CHECK(c < 0x80);

  std::string cn = synthetic_transcript_text("clip_cn", Language::CN, 1);
  CHECK(cn.find(' ') == std::string::npos);
  bool has_multibyte = false;
  for (unsigned char c : cn) has_multibyte |= c >= 0x80;
  CHECK(has_multibyte);

  CHECK(synthetic_transcript_text("x", Language::EN, 3) ==
        synthetic_transcript_text("x", Language::EN, 3));
  CHECK(synthetic_transcript_text("x", Language::EN, 3) !=
        synthetic_transcript_text("x", Language::EN, 4));
}

TEST_CASE("transcript and description maps cover every clip") {
  FixtureSpec spec;
  spec.clip_count = 30;
  Manifest<Clip> clips = synthetic_raw_clips(spec);

  auto transcripts = synthetic_transcripts(clips, spec.seed);
  auto descriptions = synthetic_descriptions(clips, spec.seed);
  CHECK(transcripts.size() == 30);
  CHECK(descriptions.size() == 30);
  for (const Clip& c : clips.records) {
    REQUIRE(transcripts.count(c.id) == 1);
    const Transcript& t = transcripts.at(c.id);
    CHECK(t.clip_id == c.id);
    CHECK(t.language == c.language);
    CHECK(t.source == TranscriptSource::asr);
    CHECK_FALSE(t.words.empty());
    CHECK(descriptions.at(c.id).find("second annotator") != std::string::npos);
  }
}

TEST_CASE("assessment fixture is exactly balanced") {
  auto v = synthetic_assessments(2400, 20260819);
  REQUIRE(v.size() == 2400);
  int consistent = 0;
  for (const auto& a : v) {
    if (a.relation == Relation::consistent) ++consistent;
    CHECK(a.intensity >= 0);
    CHECK(a.intensity <= 10);
  }
  CHECK(consistent == 1200);

  // intensities are not all alike within a class
  std::set<int> seen;
  for (const auto& a : v) {
    if (a.relation == Relation::consistent) seen.insert(a.intensity);
  }
  CHECK(seen.size() > 3);

  CHECK_THROWS_AS(synthetic_assessments(7, 1), Error);
  CHECK_THROWS_AS(synthetic_assessments(0, 1), Error);
  CHECK_THROWS_AS(synthetic_assessments(-4, 1), Error);
}

TEST_CASE("prediction fixture mixes hits and misses") {
  auto preds = synthetic_predictions(40, 20260819);
  REQUIRE(preds.size() == 40);
  int hits = 0;
  for (const auto& [predicted, gold] : preds) {
    CHECK_FALSE(predicted.empty());
    CHECK_FALSE(gold.empty());
    if (predicted == gold) ++hits;
  }
  CHECK(hits > 0);
  CHECK(hits < 40);
}

TEST_CASE("clip marker extraction") {
  CHECK(extract_clip_marker("clip_id: clip_0042\nmore text") == "clip_0042");
  CHECK(extract_clip_marker("header\nclip_id:\tclip_1 trailing") == "clip_1");
  CHECK(extract_clip_marker("clip_id: solo") == "solo");
  CHECK(extract_clip_marker("no marker here") == "");
  CHECK(extract_clip_marker("clip_id:") == "");
  CHECK(extract_clip_marker("clip_id:   \n") == "");
}

TEST_CASE("annotation mock corrupts flagged clips only") {
  std::uint64_t seed = 20260819;
  auto mock = make_annotation_mock(seed);
  ChatClient client(mock, ClientConfig{});

  // find one honest and one hallucinating EN clip
  std::string honest;
  std::string liar;
  for (int i = 0; i < 400 && (honest.empty() || liar.empty()); ++i) {
    std::string id = "probe_" + std::to_string(i);
    if (synth_hash(seed, "lang", id) % 5 == 0) continue;  // skip CN
    (synthetic_hallucinates(id, seed) ? liar : honest) = id;
  }
  REQUIRE_FALSE(honest.empty());
  REQUIRE_FALSE(liar.empty());

  auto speech_of = [&](const std::string& id) {
    std::vector<ChatMessage> msgs = {
        {"user", "dimension: speech_content\nclip_id: " + id + "\n"}};
    return client.generate("annotate", msgs, 0.0, 1)[0];
  };
  CHECK(speech_of(honest) == synthetic_transcript_text(honest, Language::EN, seed));
  CHECK(speech_of(liar) != synthetic_transcript_text(liar, Language::EN, seed));
}

TEST_CASE("stage mocks answer their own stage shapes") {
  std::uint64_t seed = 7;
  std::string payload = "clip_id: clip_0001\n";

  auto ask = [&](std::shared_ptr<MockTransport> mock, const std::string& system,
                 const std::string& text) {
    ChatClient c(mock, ClientConfig{});
    std::vector<ChatMessage> msgs = {{"user", text}};
    return c.generate(system, msgs, 0.0, 1)[0];
  };

  SUBCASE("semantic judge replies a score") {
    std::string r = ask(make_semantic_judge_mock(seed),
                        "compare description A with description B", payload);
    CHECK(r.rfind("score: ", 0) == 0);
  }
  SUBCASE("assessment judge replies per stage") {
    std::string rel = ask(make_assessment_judge_mock(seed),
                          "relation: consistent|inconsistent", payload);
    CHECK((rel == "relation: consistent" || rel == "relation: inconsistent"));
    std::string inten =
        ask(make_assessment_judge_mock(seed), "The clip below was classified as consistent.",
            payload);
    CHECK(inten.rfind("score: ", 0) == 0);
  }
  SUBCASE("sampling mock always parses on slots 0 and 1") {
    auto mock = make_sampling_mock(seed);
    ChatClient c(mock, ClientConfig{});
    std::vector<ChatMessage> msgs = {{"user", payload}};
    for (int trial = 0; trial < 20; ++trial) {
      std::string id = "clip_t" + std::to_string(trial);
      std::vector<ChatMessage> m2 = {{"user", "clip_id: " + id + "\n"}};
      auto outs = c.generate("reply in the tagged evidence format", m2, 0.8, 4);
      REQUIRE(outs.size() == 4);
      CHECK_NOTHROW(parse_triplet(outs[0]));
      CHECK_NOTHROW(parse_triplet(outs[1]));
    }
  }
  SUBCASE("preference judge scores each listed candidate") {
    std::string text = payload + "\ncandidate 1:\nx\n\ncandidate 2:\ny\n\ncandidate 3:\nz\n";
    std::string r = ask(make_preference_judge_mock(seed), "Score each candidate", text);
    CHECK(std::count(r.begin(), r.end(), '\n') == 3);
    CHECK(r.rfind("score: ", 0) == 0);
  }
  SUBCASE("overlap judge replies clue and label") {
    std::string r = ask(make_overlap_judge_mock(seed),
                        "Reply with: clue: <real 0-10> and label: <real 0-10>", payload);
    CHECK(r.find("clue: ") != std::string::npos);
    CHECK(r.find("label: ") != std::string::npos);
  }
  SUBCASE("six-dimension judge keys on the referenced dimension") {
    auto mock = make_sixdim_judge_mock(seed);
    ChatClient c(mock, ClientConfig{});
    std::set<std::string> replies;
    for (const char* clip : {"clip_0001", "clip_0002", "clip_0003"}) {
      for (std::string_view name : kDimensionNames) {
        std::vector<ChatMessage> msgs = {
            {"user", "clip_id: " + std::string(clip) + "\n\nreference " +
                         std::string(name) + ":\nref text\n"}};
        replies.insert(c.generate("rate on a 0-3 scale", msgs, 0.0, 1)[0]);
      }
    }
    // scores must not collapse to a single value across dims and clips
    CHECK(replies.size() > 1);
  }
}

TEST_CASE("mock replies are deterministic per seed") {
  for (std::uint64_t seed : {1ull, 20260819ull}) {
    auto m1 = make_annotation_mock(seed);
    auto m2 = make_annotation_mock(seed);
    ChatClient c1(m1, ClientConfig{});
    ChatClient c2(m2, ClientConfig{});
    std::vector<ChatMessage> msgs = {
        {"user", "dimension: facial_expression\nclip_id: clip_0009\n"}};
    CHECK(c1.generate("annotate", msgs, 0.0, 1) == c2.generate("annotate", msgs, 0.0, 1));
  }
}

TEST_CASE("fixture writer emits the complete file set") {
  TempDir tmp;
  FixtureSpec spec;
  spec.clip_count = 12;
  spec.seed = 5;
  auto dir = tmp.file("fixtures");
  write_fixture_files(dir, spec);

  for (const char* name :
       {"raw_clips.jsonl", "transcripts.jsonl", "descriptions.jsonl", "responses.jsonl",
        "assessments_2400.jsonl", "predictions.jsonl", "eval_pairs.jsonl"}) {
    CHECK(std::filesystem::exists(dir / name));
  }

  Manifest<Clip> clips = load_manifest<Clip>(dir / "raw_clips.jsonl", Stage::raw);
  CHECK(clips.records.size() == 12);

  Manifest<ConsistencyAssessment> assessments =
      load_manifest<ConsistencyAssessment>(dir / "assessments_2400.jsonl", Stage::assessed);
  CHECK(assessments.records.size() == 2400);

  // byte-stable across runs
  auto dir2 = tmp.file("fixtures2");
  write_fixture_files(dir2, spec);
  for (const char* name : {"raw_clips.jsonl", "transcripts.jsonl", "eval_pairs.jsonl"}) {
    CHECK(slurp(dir / name) == slurp(dir2 / name));
  }
}
