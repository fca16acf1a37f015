// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saber/clients.hpp"
#include "saber/manifest.hpp"

namespace saber {

// The six annotation dimensions, in canonical order.
inline constexpr std::array<std::string_view, 6> kDimensionNames = {
    "video_description",     "speech_content", "acoustic_features",
    "facial_expression",     "body_language",  "comprehensive_reasoning",
};

struct SixDimAnnotation {
  std::string clip_id;
  std::string video_description;
  std::string speech_content;
  std::string acoustic_features;
  std::string facial_expression;
  std::string body_language;
  std::string comprehensive_reasoning;

  bool operator==(const SixDimAnnotation&) const = default;
};

const std::string& dimension_field(const SixDimAnnotation& a, std::size_t index);
std::string& dimension_field(SixDimAnnotation& a, std::size_t index);

// System instruction plus one prompt template per dimension, in canonical
// order. Templates are text with placeholders: {clip_id}, {video_ref},
// {audio_ref}, and {prior:<dimension>} for the response of an earlier
// dimension.
struct PromptSchema {
  std::string system_instruction;
  std::vector<std::pair<std::string, std::string>> per_dimension_prompts;
};

// Throws Error unless the schema has exactly the six canonical dimensions in
// order, with non-empty templates and system instruction.
void validate(const PromptSchema& schema);

PromptSchema default_prompt_schema();

// Directory layout: system.txt plus 01_video_description.txt ..
// 06_comprehensive_reasoning.txt.
PromptSchema load_prompt_schema(const std::filesystem::path& dir);
void save_prompt_schema(const PromptSchema& schema, const std::filesystem::path& dir);

// Substitutes {name} placeholders from vars. Unknown placeholders throw
// TemplateError.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars);

// Renders all six prompts for one clip. {prior:<dim>} must name a dimension
// that comes earlier in the schema (TemplateError otherwise); priors absent
// from the map render as empty text, which makes preview rendering (no
// responses yet) well defined.
std::vector<std::string> build_prompts(const PromptSchema& schema, const Clip& clip,
                                       const std::map<std::string, std::string>& priors = {});

// Issues the six generation requests sequentially, accumulating each
// response as a prior for later dimensions, so the final reasoning prompt
// carries the five earlier responses verbatim (with the default schema).
// Empty responses throw EmptyDimension; client failures propagate.
SixDimAnnotation annotate_clip(ChatClient& client, const PromptSchema& schema,
                               const Clip& clip);

struct AnnotateRunResult {
  Manifest<SixDimAnnotation> annotated;                    // stage = annotated
  std::vector<std::pair<std::string, std::string>> skipped;  // (clip id, error)
};

// Annotates every clip of a filtered manifest, clips in parallel up to
// `jobs`, the six requests within one clip strictly sequential. A clip whose
// requests fail after retries is skipped and reported, not fatal.
AnnotateRunResult annotate_manifest(ChatClient& client, const PromptSchema& schema,
                                    const Manifest<Clip>& clips, int jobs = 1);

}  // namespace saber
