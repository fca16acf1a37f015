// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "saber/annotation.hpp"
#include "saber/clients.hpp"
#include "saber/manifest.hpp"

namespace saber {

enum class TranscriptSource { asr, annotation };

// Normalized word tokens for one clip. Tokens carry no whitespace and have
// normalization already applied; language records which tokenization rule
// produced them.
struct Transcript {
  std::string clip_id;
  std::vector<std::string> words;
  TranscriptSource source = TranscriptSource::asr;
  Language language = Language::EN;
};

// Tokenization is the bit-stable contract WER depends on: lowercase ASCII,
// strip leading/trailing punctuation per token, collapse whitespace. EN text
// splits on whitespace; CN text yields one token per CJK code point, with
// embedded ASCII alphanumeric runs kept as single tokens. Idempotent:
// re-tokenizing the joined tokens changes nothing.
std::vector<std::string> normalize_tokens(std::string_view text, Language lang);

Transcript make_transcript(const std::string& clip_id, std::string_view text,
                           TranscriptSource source, Language lang);

struct QaThresholds {
  double max_wer = 0.3;
  int min_semantic_score = 6;  // 0..10
};

void validate(const QaThresholds& t);

// (substitutions + deletions + insertions) / |reference| under
// minimum-edit-distance alignment of word tokens, unit costs. May exceed 1
// when the hypothesis is longer. Throws EmptyReference.
double word_error_rate(const Transcript& reference, const Transcript& hypothesis);

struct WerRejection {
  SixDimAnnotation annotation;
  double wer = 0.0;
};

struct WerFilterResult {
  Manifest<SixDimAnnotation> kept;  // stage = annotated
  std::vector<WerRejection> rejected;
};

// Keeps an annotation iff WER(asr transcript, annotation speech tokens) is
// <= t.max_wer. The annotation side is tokenized with the ASR transcript's
// language. Throws MissingTranscript for clips without an ASR entry.
WerFilterResult filter_by_wer(const Manifest<SixDimAnnotation>& annotations,
                              const std::map<std::string, Transcript>& transcripts,
                              const QaThresholds& t);

// ASR transcript ingestion: JSON Lines of {clip_id, text}; language for
// tokenization comes from the clips map (records may override with their own
// "language" field). Throws MissingTranscript if a clip_id is unknown to the
// map and the record carries no language.
std::map<std::string, Transcript> load_transcripts(
    const std::filesystem::path& path,
    const std::map<std::string, Language>& clip_languages);

inline constexpr std::string_view kDefaultSemanticRubric =
    "You compare two descriptions of the same video clip. Rate their semantic\n"
    "consistency on an integer scale from 0 (contradictory) to 10 (equivalent),\n"
    "judging scene, participants, and actions rather than wording.\n"
    "Reply with a single line: score: <integer 0-10>\n";

struct SemanticVerdict {
  int score = 0;  // 0..10
  bool kept = false;
};

// Judge-based semantic consistency of the annotation's video description
// against an independently produced description. kept iff score >=
// t.min_semantic_score. Throws EmptyInput on an empty independent
// description, UnparseableVerdict/OutOfRange on bad judge output.
SemanticVerdict semantic_consistency_check(ChatClient& judge,
                                           const SixDimAnnotation& annotation,
                                           const std::string& independent_description,
                                           const QaThresholds& t,
                                           std::string_view rubric = kDefaultSemanticRubric);

// Per-clip QA report row.
struct QaReportRow {
  std::string clip_id;
  double wer = -1.0;        // -1 when the stage did not run for this clip
  int semantic_score = -1;  // -1 when unscored
  bool kept = false;
};

void write_qa_report(const std::vector<QaReportRow>& rows,
                     const std::filesystem::path& path);

}  // namespace saber
