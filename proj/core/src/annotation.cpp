// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/annotation.hpp"

#include <fstream>
#include <sstream>

#include "saber/concurrency.hpp"
#include "textutil.hpp"

namespace saber {

const std::string& dimension_field(const SixDimAnnotation& a, std::size_t index) {
  switch (index) {
    case 0: return a.video_description;
    case 1: return a.speech_content;
    case 2: return a.acoustic_features;
    case 3: return a.facial_expression;
    case 4: return a.body_language;
    case 5: return a.comprehensive_reasoning;
    default: throw Error("dimension index out of range");
  }
}

std::string& dimension_field(SixDimAnnotation& a, std::size_t index) {
  return const_cast<std::string&>(
      dimension_field(static_cast<const SixDimAnnotation&>(a), index));
}

void validate(const PromptSchema& schema) {
  if (detail::trim(schema.system_instruction).empty()) {
    throw Error("prompt schema: empty system instruction");
  }
  if (schema.per_dimension_prompts.size() != kDimensionNames.size()) {
    throw Error("prompt schema: expected " + std::to_string(kDimensionNames.size()) +
                " dimension prompts, got " +
                std::to_string(schema.per_dimension_prompts.size()));
  }
  for (std::size_t i = 0; i < kDimensionNames.size(); ++i) {
    const auto& [name, tmpl] = schema.per_dimension_prompts[i];
    if (name != kDimensionNames[i]) {
      throw Error("prompt schema: dimension " + std::to_string(i + 1) + " must be " +
                  std::string(kDimensionNames[i]) + ", got " + name);
    }
    if (detail::trim(tmpl).empty()) throw Error("prompt schema: empty template for " + name);
  }
}

PromptSchema default_prompt_schema() {
  auto header = [](std::string_view dim) {
    std::string h = "dimension: ";
    h += dim;
    h += "\nclip_id: {clip_id}\nvideo_ref: {video_ref}\naudio_ref: {audio_ref}\n\n";
    return h;
  };

  PromptSchema s;
  s.system_instruction =
      "You are an affective-computing annotator. Describe only what the referenced\n"
      "media supports; when audio and visual cues conflict, report the conflict\n"
      "instead of harmonizing it.\n";

  s.per_dimension_prompts = {
      {"video_description",
       header("video_description") +
           "Describe the visual scene: setting, participants, visible actions, and\n"
           "salient objects. Two to four sentences.\n"},
      {"speech_content",
       header("speech_content") +
           "Transcribe the spoken content verbatim. Output only the words spoken,\n"
           "nothing else.\n"},
      {"acoustic_features",
       header("acoustic_features") +
           "Describe the voice: pitch movement, rhythm, loudness, tonal intensity,\n"
           "and any non-speech vocalizations.\n"},
      {"facial_expression",
       header("facial_expression") +
           "Describe facial expressions over the clip, including brief\n"
           "micro-expressions and where they occur.\n"},
      {"body_language",
       header("body_language") +
           "Describe posture, gestures, and body orientation, and how they change.\n"},
      {"comprehensive_reasoning",
       header("comprehensive_reasoning") +
           "visual scene:\n{prior:video_description}\n\n"
           "speech:\n{prior:speech_content}\n\n"
           "voice:\n{prior:acoustic_features}\n\n"
           "face:\n{prior:facial_expression}\n\n"
           "body:\n{prior:body_language}\n\n"
           "Synthesize the evidence above into the clip's emotional state. State\n"
           "explicitly whether the acoustic and visual cues agree or conflict.\n"},
  };
  return s;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read prompt file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write prompt file: " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

std::string dimension_file_name(std::size_t index) {
  return "0" + std::to_string(index + 1) + "_" + std::string(kDimensionNames[index]) + ".txt";
}

}  // namespace

PromptSchema load_prompt_schema(const std::filesystem::path& dir) {
  PromptSchema s;
  s.system_instruction = read_file(dir / "system.txt");
  for (std::size_t i = 0; i < kDimensionNames.size(); ++i) {
    s.per_dimension_prompts.emplace_back(std::string(kDimensionNames[i]),
                                         read_file(dir / dimension_file_name(i)));
  }
  validate(s);
  return s;
}

void save_prompt_schema(const PromptSchema& schema, const std::filesystem::path& dir) {
  validate(schema);
  std::filesystem::create_directories(dir);
  write_file(dir / "system.txt", schema.system_instruction);
  for (std::size_t i = 0; i < schema.per_dimension_prompts.size(); ++i) {
    write_file(dir / dimension_file_name(i), schema.per_dimension_prompts[i].second);
  }
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    char c = tmpl[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t close = tmpl.find('}', i + 1);
    if (close == std::string_view::npos) throw Error("unterminated placeholder");
    std::string name(tmpl.substr(i + 1, close - i - 1));
    auto it = vars.find(name);
    if (it == vars.end()) throw TemplateError(name);
    out += it->second;
    i = close + 1;
  }
  return out;
}

std::vector<std::string> build_prompts(const PromptSchema& schema, const Clip& clip,
                                       const std::map<std::string, std::string>& priors) {
  validate(schema);
  std::map<std::string, std::string> vars;
  vars["clip_id"] = clip.id;
  vars["video_ref"] = clip.video_ref;
  vars["audio_ref"] = clip.audio_ref;

  std::vector<std::string> prompts;
  prompts.reserve(schema.per_dimension_prompts.size());
  for (std::size_t i = 0; i < schema.per_dimension_prompts.size(); ++i) {
    prompts.push_back(render_template(schema.per_dimension_prompts[i].second, vars));
    // the dimension just rendered becomes an available prior for later ones
    const std::string& name = schema.per_dimension_prompts[i].first;
    auto it = priors.find(name);
    vars["prior:" + name] = it != priors.end() ? it->second : "";
  }
  return prompts;
}

SixDimAnnotation annotate_clip(ChatClient& client, const PromptSchema& schema,
                               const Clip& clip) {
  validate(schema);
  SixDimAnnotation a;
  a.clip_id = clip.id;

  std::map<std::string, std::string> vars;
  vars["clip_id"] = clip.id;
  vars["video_ref"] = clip.video_ref;
  vars["audio_ref"] = clip.audio_ref;

  double temperature = client.config().temperature.value_or(0.0);
  for (std::size_t i = 0; i < schema.per_dimension_prompts.size(); ++i) {
    const auto& [name, tmpl] = schema.per_dimension_prompts[i];
    std::string prompt = render_template(tmpl, vars);
    std::vector<ChatMessage> messages = {{"user", prompt}};
    std::string response =
        client.generate(schema.system_instruction, messages, temperature, 1).front();
    if (detail::trim(response).empty()) throw EmptyDimension(name);
    dimension_field(a, i) = response;
    vars["prior:" + name] = response;
  }
  return a;
}

AnnotateRunResult annotate_manifest(ChatClient& client, const PromptSchema& schema,
                                    const Manifest<Clip>& clips, int jobs) {
  if (clips.stage != Stage::filtered) {
    throw StageMismatch("filtered", to_string(clips.stage));
  }
  validate(schema);

  auto outcome = parallel_map<SixDimAnnotation>(
      clips.records.size(), jobs,
      [&](std::size_t i) { return annotate_clip(client, schema, clips.records[i]); });

  AnnotateRunResult result;
  result.annotated.stage = Stage::annotated;
  for (std::size_t i = 0; i < clips.records.size(); ++i) {
    if (outcome.errors[i]) {
      std::string reason = "unknown error";
      try {
        std::rethrow_exception(outcome.errors[i]);
      } catch (const std::exception& e) {
        reason = e.what();
      } catch (...) {
      }
      result.skipped.emplace_back(clips.records[i].id, reason);
    } else {
      result.annotated.records.push_back(std::move(outcome.results[i]));
    }
  }
  return result;
}

}  // namespace saber
