// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/consistency.hpp"

#include <algorithm>

namespace saber {
namespace {

std::string annotation_payload(const SixDimAnnotation& a) {
  std::string payload = "clip_id: " + a.clip_id + "\n";
  for (std::size_t d = 0; d < kDimensionNames.size(); ++d) {
    payload += "\n";
    payload += kDimensionNames[d];
    payload += ":\n";
    payload += dimension_field(a, d);
    payload += "\n";
  }
  return payload;
}

}  // namespace

ConsistencyAssessment assess_consistency(ChatClient& judge, const SixDimAnnotation& annotation,
                                         std::string_view relation_rubric,
                                         std::string_view intensity_rubric) {
  std::string payload = annotation_payload(annotation);

  ConsistencyAssessment out;
  out.clip_id = annotation.clip_id;
  out.relation = parse_verdict_relation(judge.judge(std::string(relation_rubric), payload));

  std::string stage2 = render_template(intensity_rubric,
                                       {{"relation", to_string(out.relation)}});
  out.intensity = parse_verdict_int(judge.judge(stage2, payload), "score", 0, 10);
  return out;
}

TestSet assemble_test_set(const std::vector<ConsistencyAssessment>& assessments, int total) {
  if (total <= 0 || total % 2 != 0) {
    throw Error("test-set total must be positive and even, got " + std::to_string(total));
  }
  const std::size_t half = static_cast<std::size_t>(total) / 2;

  auto ranked_ids = [&](Relation r) {
    std::vector<const ConsistencyAssessment*> pool;
    for (const auto& a : assessments) {
      if (a.relation == r) pool.push_back(&a);
    }
    if (pool.size() < half) {
      throw InsufficientSamples(to_string(r), pool.size(), half);
    }
    std::sort(pool.begin(), pool.end(),
              [](const ConsistencyAssessment* x, const ConsistencyAssessment* y) {
                if (x->intensity != y->intensity) return x->intensity > y->intensity;
                return x->clip_id < y->clip_id;
              });
    std::vector<std::string> ids;
    ids.reserve(half);
    for (std::size_t i = 0; i < half; ++i) ids.push_back(pool[i]->clip_id);
    return ids;
  };

  TestSet ts;
  ts.consistent_subset = ranked_ids(Relation::consistent);
  ts.inconsistent_subset = ranked_ids(Relation::inconsistent);
  return ts;
}

Manifest<TestSetEntry> test_set_to_manifest(const TestSet& ts) {
  Manifest<TestSetEntry> m;
  m.stage = Stage::test_set;
  m.records.reserve(ts.consistent_subset.size() + ts.inconsistent_subset.size());
  for (const std::string& id : ts.consistent_subset) {
    m.records.push_back({id, Relation::consistent});
  }
  for (const std::string& id : ts.inconsistent_subset) {
    m.records.push_back({id, Relation::inconsistent});
  }
  return m;
}

}  // namespace saber
