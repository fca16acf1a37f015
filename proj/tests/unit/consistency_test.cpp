// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <memory>
#include <random>
#include <set>

#include <doctest.h>

#include "saber/consistency.hpp"

using namespace saber;

namespace {

SixDimAnnotation sample_annotation(const std::string& id = "clip_5") {
  SixDimAnnotation a;
  a.clip_id = id;
  a.video_description = "bright smile while waving";
  a.speech_content = "i am fine";
  a.acoustic_features = "flat, quiet, slow";
  a.facial_expression = "forced smile";
  a.body_language = "closed posture";
  a.comprehensive_reasoning = "visual cheer conflicts with vocal fatigue";
  return a;
}

std::vector<ConsistencyAssessment> make_pool(int per_class) {
  std::vector<ConsistencyAssessment> v;
  for (int i = 0; i < per_class; ++i) {
    v.push_back({"con_" + std::to_string(i), Relation::consistent, i % 11});
    v.push_back({"inc_" + std::to_string(i), Relation::inconsistent, (i * 7) % 11});
  }
  return v;
}

}  // namespace

TEST_CASE("two-stage assessment issues two judge calls in order") {
  auto mock = std::make_shared<MockTransport>();
  mock->push_response("relation: inconsistent");
  mock->push_response("score: 8");
  ChatClient judge(mock, ClientConfig{});

  ConsistencyAssessment a = assess_consistency(judge, sample_annotation());
  CHECK(a.clip_id == "clip_5");
  CHECK(a.relation == Relation::inconsistent);
  CHECK(a.intensity == 8);

  auto calls = mock->calls();
  REQUIRE(calls.size() == 2);
  // stage 2 names the stage-1 verdict in its rubric
  CHECK(calls[1].system.find("inconsistent") != std::string::npos);
  // both payloads carry the clip marker and all six dimensions
  for (const auto& call : calls) {
    const std::string& payload = call.messages[0].content;
    CHECK(payload.find("clip_id: clip_5") != std::string::npos);
    CHECK(payload.find("comprehensive_reasoning") != std::string::npos);
  }
}

TEST_CASE("assessment propagates verdict failures") {
  SUBCASE("bad relation") {
    auto mock = std::make_shared<MockTransport>();
    mock->push_response("relation: mixed");
    ChatClient judge(mock, ClientConfig{});
    CHECK_THROWS_AS(assess_consistency(judge, sample_annotation()), UnparseableVerdict);
  }
  SUBCASE("intensity out of range") {
    auto mock = std::make_shared<MockTransport>();
    mock->push_response("relation: consistent");
    mock->push_response("score: 42");
    ChatClient judge(mock, ClientConfig{});
    CHECK_THROWS_AS(assess_consistency(judge, sample_annotation()), UnparseableVerdict);
  }
  SUBCASE("fractional intensity") {
    auto mock = std::make_shared<MockTransport>();
    mock->push_response("relation: consistent");
    mock->push_response("score: 6.5");
    ChatClient judge(mock, ClientConfig{});
    CHECK_THROWS_AS(assess_consistency(judge, sample_annotation()), UnparseableVerdict);
  }
}

TEST_CASE("test set takes the top half per class by intensity") {
  std::vector<ConsistencyAssessment> pool = {
      {"c1", Relation::consistent, 2},  {"c2", Relation::consistent, 9},
      {"c3", Relation::consistent, 5},  {"c4", Relation::consistent, 7},
      {"i1", Relation::inconsistent, 1}, {"i2", Relation::inconsistent, 10},
      {"i3", Relation::inconsistent, 4}, {"i4", Relation::inconsistent, 6},
  };
  TestSet ts = assemble_test_set(pool, 4);
  CHECK(ts.consistent_subset == std::vector<std::string>{"c2", "c4"});
  CHECK(ts.inconsistent_subset == std::vector<std::string>{"i2", "i4"});
}

TEST_CASE("intensity ties break by clip id ascending") {
  std::vector<ConsistencyAssessment> pool = {
      {"zeta", Relation::consistent, 5},
      {"alpha", Relation::consistent, 5},
      {"mid", Relation::consistent, 5},
      {"i1", Relation::inconsistent, 3},
      {"i2", Relation::inconsistent, 2},
  };
  TestSet ts = assemble_test_set(pool, 2);
  CHECK(ts.consistent_subset == std::vector<std::string>{"alpha"});
  CHECK(ts.inconsistent_subset == std::vector<std::string>{"i1"});
}

TEST_CASE("selection dominance holds on random pools") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ConsistencyAssessment> pool;
    int per_class = 20 + static_cast<int>(rng() % 30);
    for (int i = 0; i < per_class; ++i) {
      pool.push_back({"c" + std::to_string(i), Relation::consistent,
                      static_cast<int>(rng() % 11)});
      pool.push_back({"i" + std::to_string(i), Relation::inconsistent,
                      static_cast<int>(rng() % 11)});
    }
    int half = 1 + static_cast<int>(rng() % per_class);
    TestSet ts = assemble_test_set(pool, 2 * half);

    for (auto [subset, rel] :
         {std::pair{&ts.consistent_subset, Relation::consistent},
          std::pair{&ts.inconsistent_subset, Relation::inconsistent}}) {
      std::set<std::string> kept(subset->begin(), subset->end());
      int min_kept = 11;
      int max_dropped = -1;
      for (const auto& a : pool) {
        if (a.relation != rel) continue;
        if (kept.count(a.clip_id)) {
          min_kept = std::min(min_kept, a.intensity);
        } else {
          max_dropped = std::max(max_dropped, a.intensity);
        }
      }
      CHECK(min_kept >= max_dropped);
    }
  }
}

TEST_CASE("test set rejects bad totals") {
  auto pool = make_pool(10);
  CHECK_THROWS_AS(assemble_test_set(pool, 3), Error);
  CHECK_THROWS_AS(assemble_test_set(pool, 0), Error);
  CHECK_THROWS_AS(assemble_test_set(pool, -2), Error);
}

TEST_CASE("test set reports the short class") {
  std::vector<ConsistencyAssessment> pool = {
      {"c1", Relation::consistent, 2},
      {"c2", Relation::consistent, 9},
      {"i1", Relation::inconsistent, 1},
  };
  try {
    assemble_test_set(pool, 4);
    FAIL("expected InsufficientSamples");
  } catch (const InsufficientSamples& e) {
    CHECK(e.relation == "inconsistent");
    CHECK(e.available == 1);
    CHECK(e.needed == 2);
  }
}

TEST_CASE("test set manifest lists consistent entries first") {
  TestSet ts;
  ts.consistent_subset = {"c2", "c1"};
  ts.inconsistent_subset = {"i9"};
  Manifest<TestSetEntry> m = test_set_to_manifest(ts);
  CHECK(m.stage == Stage::test_set);
  REQUIRE(m.records.size() == 3);
  CHECK(m.records[0] == TestSetEntry{"c2", Relation::consistent});
  CHECK(m.records[1] == TestSetEntry{"c1", Relation::consistent});
  CHECK(m.records[2] == TestSetEntry{"i9", Relation::inconsistent});
}
