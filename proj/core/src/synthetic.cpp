// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/synthetic.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "saber/sed.hpp"
#include "saber/annotation.hpp"

namespace saber {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t synth_hash(std::uint64_t seed, std::string_view tag, std::string_view a,
                         std::string_view b) {
  std::string key;
  key.reserve(tag.size() + a.size() + b.size() + 24);
  key += tag;
  key += '\x1f';
  key += a;
  key += '\x1f';
  key += b;
  key += '\x1f';
  key += std::to_string(seed);
  // splitmix64 finalizer: raw FNV-1a low bits are too regular for the
  // small-modulus draws every synthetic choice relies on
  std::uint64_t h = fnv1a64(key);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

namespace {

constexpr std::array<std::string_view, 24> kEnWords = {
    "the",  "speaker", "pauses",  "and",    "smiles", "while", "looking", "away",
    "voice", "rises",  "sharply", "then",   "drops",  "to",    "a",       "whisper",
    "hands", "tremble", "slightly", "eyes", "narrow", "with",  "focus",   "breath"};

constexpr std::array<std::string_view, 20> kCnChars = {
    "我", "你", "他", "她", "说", "笑", "哭",
    "走", "看", "听", "声", "音", "高", "低",
    "快", "慢", "手", "眼", "心", "好"};

constexpr std::array<std::string_view, 8> kAdjectives = {
    "young", "weary", "animated", "composed", "restless", "stern", "cheerful", "guarded"};
constexpr std::array<std::string_view, 8> kPlaces = {
    "kitchen", "office", "hallway", "garden", "studio", "car", "classroom", "stairwell"};
constexpr std::array<std::string_view, 8> kActions = {
    "gesturing at a screen",   "leaning against a wall", "sorting papers",
    "holding a phone",         "stirring a cup",         "packing a bag",
    "adjusting a lamp",        "facing a window"};
constexpr std::array<std::string_view, 6> kVoiceQualities = {
    "steady", "strained", "breathy", "clipped", "warm", "flat"};
constexpr std::array<std::string_view, 6> kPitches = {"rising",  "falling", "level",
                                                      "wavering", "high",    "low"};
constexpr std::array<std::string_view, 6> kPaces = {"hurried",    "measured", "halting",
                                                    "accelerating", "slow",     "uneven"};
constexpr std::array<std::string_view, 6> kFaces = {
    "a tight smile", "raised eyebrows", "a furrowed brow",
    "widened eyes",  "a trembling lip", "a fixed neutral look"};
constexpr std::array<std::string_view, 6> kMicro = {
    "flash of contempt", "suppressed grin", "eye twitch",
    "jaw clench",        "nostril flare",   "quick grimace"};
constexpr std::array<std::string_view, 6> kPostures = {
    "upright", "slumped", "angled away", "leaning forward", "rigid", "relaxed"};
constexpr std::array<std::string_view, 6> kGestures = {
    "small and contained", "broad and emphatic", "repetitive",
    "absent",              "self-soothing",      "pointed"};
constexpr std::array<std::string_view, 8> kEmotions = {
    "suppressed anger", "quiet relief",   "mounting anxiety", "forced cheerfulness",
    "genuine delight",  "weary sadness",  "guarded surprise", "calm confidence"};
constexpr std::array<std::string_view, 6> kGoldLabels = {"happy",   "sad",     "angry",
                                                         "neutral", "surprised", "fearful"};

std::string clip_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "clip_%04d", i);
  return buf;
}

Language clip_language(std::uint64_t seed, const std::string& clip_id) {
  return synth_hash(seed, "lang", clip_id) % 5 == 0 ? Language::CN : Language::EN;
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& list, std::uint64_t h) {
  return list[h % N];
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

// corrupted alternative used when a clip is flagged as hallucinating
std::string scrambled_transcript_text(const std::string& clip_id, Language lang,
                                      std::uint64_t seed) {
  std::string text;
  if (lang == Language::CN) {
    std::size_t count = 5 + synth_hash(seed, "xlen", clip_id) % 5;
    for (std::size_t i = 0; i < count; ++i) {
      text += pick(kCnChars, synth_hash(seed, "xc", clip_id, std::to_string(i)));
    }
  } else {
    std::size_t count = 6 + synth_hash(seed, "xlen", clip_id) % 6;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0) text += ' ';
      text += pick(kEnWords, synth_hash(seed, "xw", clip_id, std::to_string(i)));
    }
  }
  return text;
}

std::string mock_video_description(const std::string& id, std::uint64_t seed) {
  std::string s = "A ";
  s += pick(kAdjectives, synth_hash(seed, "vd1", id));
  s += " person in a ";
  s += pick(kPlaces, synth_hash(seed, "vd2", id));
  s += ", ";
  s += pick(kActions, synth_hash(seed, "vd3", id));
  s += ".";
  return s;
}

std::string mock_triplet_text(std::uint64_t seed, const std::string& id, int slot) {
  SedTriplet t;
  std::string tag = std::to_string(slot);
  t.visual_evidence = "Sees " + std::string(pick(kFaces, synth_hash(seed, "tv", id, tag))) +
                      " and " + std::string(pick(kGestures, synth_hash(seed, "tg", id, tag))) +
                      " gestures.";
  t.acoustic_evidence =
      "Hears a " + std::string(pick(kVoiceQualities, synth_hash(seed, "ta", id, tag))) +
      " voice with " + std::string(pick(kPitches, synth_hash(seed, "tp", id, tag))) +
      " pitch.";
  t.reasoning = "Reads the clip as " +
                std::string(pick(kEmotions, synth_hash(seed, "tr", id, tag))) +
                " (variant " + tag + " for " + id + ").";
  return serialize_triplet(t);
}

}  // namespace

Manifest<Clip> synthetic_raw_clips(const FixtureSpec& spec) {
  if (spec.clip_count < 2) throw Error("fixture needs at least 2 clips");
  Manifest<Clip> m;
  m.stage = Stage::raw;
  m.records.reserve(static_cast<std::size_t>(spec.clip_count));
  for (int i = 0; i < spec.clip_count; ++i) {
    Clip c;
    c.id = clip_name(i);
    c.language = clip_language(spec.seed, c.id);
    c.video_ref = "media/" + c.id + ".mp4";
    c.audio_ref = "media/" + c.id + ".wav";

    std::uint64_t h = synth_hash(spec.seed, "dur", c.id);
    if (i == 0) {
      c.duration_s = 0.5;  // admission boundary, kept
    } else if (i == 1) {
      c.duration_s = 30.0;  // admission boundary, kept
    } else if (i % 17 == 2) {
      c.duration_s = 0.25 + static_cast<double>(h % 20) / 100.0;  // too short
    } else if (i % 17 == 5) {
      c.duration_s = 31.0 + static_cast<double>(h % 100) / 10.0;  // too long
    } else {
      c.duration_s = 1.0 + static_cast<double>(h % 2800) / 100.0;
    }
    c.resolution_ok = i % 19 != 3;
    c.has_audio_track = i % 23 != 4;
    c.noise_flag = i % 29 == 6;
    m.records.push_back(std::move(c));
  }
  return m;
}

std::string synthetic_transcript_text(const std::string& clip_id, Language lang,
                                      std::uint64_t seed) {
  std::string text;
  if (lang == Language::CN) {
    std::size_t count = 5 + synth_hash(seed, "len", clip_id) % 5;
    for (std::size_t i = 0; i < count; ++i) {
      text += pick(kCnChars, synth_hash(seed, "c", clip_id, std::to_string(i)));
    }
  } else {
    std::size_t count = 6 + synth_hash(seed, "len", clip_id) % 6;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0) text += ' ';
      text += pick(kEnWords, synth_hash(seed, "w", clip_id, std::to_string(i)));
    }
  }
  return text;
}

bool synthetic_hallucinates(const std::string& clip_id, std::uint64_t seed) {
  return synth_hash(seed, "halluc", clip_id) % 7 == 0;
}

std::map<std::string, Transcript> synthetic_transcripts(const Manifest<Clip>& clips,
                                                        std::uint64_t seed) {
  std::map<std::string, Transcript> out;
  for (const Clip& c : clips.records) {
    out.emplace(c.id, make_transcript(c.id, synthetic_transcript_text(c.id, c.language, seed),
                                      TranscriptSource::asr, c.language));
  }
  return out;
}

std::map<std::string, std::string> synthetic_descriptions(const Manifest<Clip>& clips,
                                                          std::uint64_t seed) {
  std::map<std::string, std::string> out;
  for (const Clip& c : clips.records) {
    std::string s = "A ";
    s += pick(kAdjectives, synth_hash(seed, "dd1", c.id));
    s += " person in a ";
    s += pick(kPlaces, synth_hash(seed, "dd2", c.id));
    s += ", ";
    s += pick(kActions, synth_hash(seed, "dd3", c.id));
    s += ", recorded by a second annotator.";
    out.emplace(c.id, std::move(s));
  }
  return out;
}

std::vector<ConsistencyAssessment> synthetic_assessments(int total, std::uint64_t seed) {
  if (total <= 0 || total % 2 != 0) {
    throw Error("assessment fixture total must be positive and even");
  }
  std::vector<ConsistencyAssessment> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    ConsistencyAssessment a;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "sample_%04d", i);
    a.clip_id = buf;
    a.relation = i % 2 == 0 ? Relation::consistent : Relation::inconsistent;
    a.intensity = static_cast<int>(synth_hash(seed, "fixint", a.clip_id) % 11);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> synthetic_predictions(int count,
                                                                       std::uint64_t seed) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::string tag = std::to_string(i);
    std::string gold(pick(kGoldLabels, synth_hash(seed, "gold", tag)));
    std::string predicted = gold;
    if (synth_hash(seed, "miss", tag) % 10 >= 7) {
      predicted = pick(kGoldLabels, synth_hash(seed, "wrong", tag));
    }
    out.emplace_back(std::move(predicted), std::move(gold));
  }
  return out;
}

std::string extract_clip_marker(const std::string& text) {
  constexpr std::string_view key = "clip_id:";
  std::size_t pos = text.find(key);
  if (pos == std::string::npos) return "";
  pos += key.size();
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  std::size_t end = pos;
  while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
  return text.substr(pos, end - pos);
}

std::shared_ptr<MockTransport> make_annotation_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();

  mock->add_rule("dimension: video_description", [seed](const std::string& text, int) {
    return mock_video_description(extract_clip_marker(text), seed);
  });
  mock->add_rule("dimension: speech_content", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    Language lang = clip_language(seed, id);
    return synthetic_hallucinates(id, seed) ? scrambled_transcript_text(id, lang, seed)
                                            : synthetic_transcript_text(id, lang, seed);
  });
  mock->add_rule("dimension: acoustic_features", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    return "The voice is " + std::string(pick(kVoiceQualities, synth_hash(seed, "af1", id))) +
           ", with " + std::string(pick(kPitches, synth_hash(seed, "af2", id))) +
           " pitch and " + std::string(pick(kPaces, synth_hash(seed, "af3", id))) + " pacing.";
  });
  mock->add_rule("dimension: facial_expression", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    return "The face shows " + std::string(pick(kFaces, synth_hash(seed, "fe1", id))) +
           ", with a brief " + std::string(pick(kMicro, synth_hash(seed, "fe2", id))) +
           " midway.";
  });
  mock->add_rule("dimension: body_language", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    return "Posture is " + std::string(pick(kPostures, synth_hash(seed, "bl1", id))) +
           " and gestures are " + std::string(pick(kGestures, synth_hash(seed, "bl2", id))) +
           ".";
  });
  mock->add_rule("dimension: comprehensive_reasoning", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    bool agree = synth_hash(seed, "cr1", id) % 2 == 0;
    return "Overall the clip reads as " +
           std::string(pick(kEmotions, synth_hash(seed, "cr2", id))) +
           "; the acoustic and visual cues " +
           (agree ? std::string("agree") : std::string("conflict")) + ".";
  });
  return mock;
}

std::shared_ptr<MockTransport> make_semantic_judge_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();
  mock->add_rule("description A", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    return "score: " + std::to_string(4 + synth_hash(seed, "sem", id) % 7);
  });
  return mock;
}

std::shared_ptr<MockTransport> make_assessment_judge_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();
  mock->add_rule("relation: consistent|inconsistent", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    bool consistent = synth_hash(seed, "rel", id) % 2 == 0;
    return std::string("relation: ") + (consistent ? "consistent" : "inconsistent");
  });
  mock->add_rule("classified as", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    return "score: " + std::to_string(synth_hash(seed, "int", id) % 11);
  });
  return mock;
}

std::shared_ptr<MockTransport> make_sampling_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();
  mock->add_rule("tagged evidence format", [seed](const std::string& text, int slot) {
    std::string id = extract_clip_marker(text);
    // slots 0 and 1 always parse, so top-2 selection never degenerates
    if (slot >= 2 && synth_hash(seed, "bad", id, std::to_string(slot)) % 8 == 0) {
      return "Free-form musing about clip " + id + ", take " + std::to_string(slot) +
             ", with no structure.";
    }
    return mock_triplet_text(seed, id, slot);
  });
  return mock;
}

std::shared_ptr<MockTransport> make_preference_judge_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();
  mock->add_rule("Score each candidate", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    std::string reply;
    for (int i = 1; text.find("candidate " + std::to_string(i) + ":") != std::string::npos;
         ++i) {
      double score =
          static_cast<double>(synth_hash(seed, "pref", id, std::to_string(i)) % 101) / 10.0;
      reply += "score: " + format_score(score) + "\n";
    }
    return reply.empty() ? std::string("score: 5.0\n") : reply;
  });
  return mock;
}

std::shared_ptr<MockTransport> make_overlap_judge_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();
  mock->add_rule("clue:", [seed](const std::string& text, int) {
    double clue = static_cast<double>(synth_hash(seed, "clue", text) % 101) / 10.0;
    double label = static_cast<double>(synth_hash(seed, "label", text) % 101) / 10.0;
    return "clue: " + format_score(clue) + "\nlabel: " + format_score(label) + "\n";
  });
  return mock;
}

std::shared_ptr<MockTransport> make_sixdim_judge_mock(std::uint64_t seed) {
  auto mock = std::make_shared<MockTransport>();
  mock->add_rule("0-3 scale", [seed](const std::string& text, int) {
    std::string id = extract_clip_marker(text);
    for (std::string_view name : kDimensionNames) {
      if (text.find("reference " + std::string(name) + ":") != std::string::npos) {
        return "score: " + std::to_string(synth_hash(seed, "6d", id, name) % 4);
      }
    }
    return std::string("score: 0");
  });
  return mock;
}

void write_fixture_files(const std::filesystem::path& dir, const FixtureSpec& spec) {
  std::filesystem::create_directories(dir);
  Manifest<Clip> clips = synthetic_raw_clips(spec);
  save_manifest(clips, dir / "raw_clips.jsonl");

  auto write_jsonl = [&](const std::filesystem::path& path, const std::vector<json>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write fixture: " + path.string());
    for (const json& j : rows) out << j.dump() << '\n';
    if (!out) throw Error("write failed: " + path.string());
  };

  std::vector<json> transcripts;
  std::vector<json> descriptions;
  std::vector<json> responses;
  auto desc = synthetic_descriptions(clips, spec.seed);
  for (const Clip& c : clips.records) {
    transcripts.push_back(
        {{"clip_id", c.id},
         {"text", synthetic_transcript_text(c.id, c.language, spec.seed)},
         {"language", to_string(c.language)}});
    descriptions.push_back({{"clip_id", c.id}, {"text", desc.at(c.id)}});
    responses.push_back({{"id", c.id}, {"response", mock_triplet_text(spec.seed, c.id, 0)}});
  }
  write_jsonl(dir / "transcripts.jsonl", transcripts);
  write_jsonl(dir / "descriptions.jsonl", descriptions);
  write_jsonl(dir / "responses.jsonl", responses);

  Manifest<ConsistencyAssessment> assessments;
  assessments.stage = Stage::assessed;
  assessments.records = synthetic_assessments(2400, spec.seed);
  save_manifest(assessments, dir / "assessments_2400.jsonl");

  std::vector<json> predictions;
  auto preds = synthetic_predictions(40, spec.seed);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "pred_%03zu", i);
    predictions.push_back(
        {{"id", buf}, {"predicted", preds[i].first}, {"gold", preds[i].second}});
  }
  write_jsonl(dir / "predictions.jsonl", predictions);

  std::vector<json> eval_pairs;
  std::size_t pair_count = std::min<std::size_t>(24, clips.records.size());
  for (std::size_t i = 0; i < pair_count; ++i) {
    const Clip& c = clips.records[i];
    eval_pairs.push_back({{"id", c.id},
                          {"reference", desc.at(c.id)},
                          {"response", mock_triplet_text(spec.seed, c.id, 1)}});
  }
  write_jsonl(dir / "eval_pairs.jsonl", eval_pairs);
}

}  // namespace saber
