// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/qa.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "saber/verdict.hpp"
#include "textutil.hpp"

namespace saber {
namespace {

using nlohmann::json;

bool ascii_punct(char32_t cp) {
  return cp < 0x80 && std::ispunct(static_cast<int>(cp)) != 0;
}

bool cjk_ideograph(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0xF900 && cp <= 0xFAFF);
}

bool cjk_punct(char32_t cp) {
  return (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65) || (cp >= 0x2018 && cp <= 0x201F) || cp == 0x2026;
}

bool ascii_space(char32_t cp) {
  return cp < 0x80 && std::isspace(static_cast<int>(cp)) != 0;
}

char32_t lower_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  return cp;
}

// Minimal UTF-8 decoder; an invalid lead or truncated sequence yields the
// raw byte as one code point, so tokenization never throws on binary junk.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> cps;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b;
    if (b >= 0xF0) {
      len = 4;
      cp = b & 0x07u;
    } else if (b >= 0xE0) {
      len = 3;
      cp = b & 0x0Fu;
    } else if (b >= 0xC0) {
      len = 2;
      cp = b & 0x1Fu;
    }
    if (len > 1) {
      if (i + len > s.size()) {
        cps.push_back(b);
        ++i;
        continue;
      }
      bool ok = true;
      char32_t acc = cp;
      for (std::size_t k = 1; k < len; ++k) {
        unsigned char c = static_cast<unsigned char>(s[i + k]);
        if ((c & 0xC0u) != 0x80u) {
          ok = false;
          break;
        }
        acc = (acc << 6) | (c & 0x3Fu);
      }
      if (!ok) {
        cps.push_back(b);
        ++i;
        continue;
      }
      cps.push_back(acc);
      i += len;
      continue;
    }
    cps.push_back(cp);
    ++i;
  }
  return cps;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string strip_edge_punct(std::string_view token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && ascii_punct(static_cast<unsigned char>(token[b]))) ++b;
  while (e > b && ascii_punct(static_cast<unsigned char>(token[e - 1]))) --e;
  return std::string(token.substr(b, e - b));
}

std::vector<std::string> tokenize_en(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      std::string stripped = strip_edge_punct(current);
      if (!stripped.empty()) tokens.push_back(std::move(stripped));
      current.clear();
    }
  };
  for (char ch : text) {
    if (detail::is_space(ch)) {
      flush();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> tokenize_cn(std::string_view text) {
  std::vector<std::string> tokens;
  std::string run;  // pending non-CJK run (ASCII words, digits)
  auto flush = [&] {
    if (!run.empty()) {
      std::string stripped = strip_edge_punct(run);
      if (!stripped.empty()) tokens.push_back(std::move(stripped));
      run.clear();
    }
  };
  for (char32_t cp : decode_utf8(text)) {
    if (cjk_ideograph(cp)) {
      flush();
      std::string one;
      encode_utf8(cp, one);
      tokens.push_back(std::move(one));
    } else if (ascii_space(cp) || cjk_punct(cp)) {
      flush();
    } else {
      encode_utf8(lower_cp(cp), run);
    }
  }
  flush();
  return tokens;
}

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text, Language lang) {
  return lang == Language::CN ? tokenize_cn(text) : tokenize_en(text);
}

Transcript make_transcript(const std::string& clip_id, std::string_view text,
                           TranscriptSource source, Language lang) {
  Transcript t;
  t.clip_id = clip_id;
  t.words = normalize_tokens(text, lang);
  t.source = source;
  t.language = lang;
  return t;
}

void validate(const QaThresholds& t) {
  if (!(t.max_wer >= 0.0)) throw Error("max_wer must be >= 0");
  if (t.min_semantic_score < 0 || t.min_semantic_score > 10) {
    throw Error("min_semantic_score must be in [0, 10]");
  }
}

double word_error_rate(const Transcript& reference, const Transcript& hypothesis) {
  const auto& ref = reference.words;
  const auto& hyp = hypothesis.words;
  if (ref.empty()) throw EmptyReference();

  // One-row Levenshtein, unit costs; row index walks the reference.
  std::vector<std::size_t> prev(hyp.size() + 1);
  std::vector<std::size_t> cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      std::size_t del = prev[j] + 1;
      std::size_t ins = cur[j - 1] + 1;
      cur[j] = std::min({sub, del, ins});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[hyp.size()]) / static_cast<double>(ref.size());
}

WerFilterResult filter_by_wer(const Manifest<SixDimAnnotation>& annotations,
                              const std::map<std::string, Transcript>& transcripts,
                              const QaThresholds& t) {
  validate(t);
  WerFilterResult result;
  result.kept.stage = Stage::annotated;
  for (const SixDimAnnotation& a : annotations.records) {
    auto it = transcripts.find(a.clip_id);
    if (it == transcripts.end()) throw MissingTranscript(a.clip_id);
    Transcript hyp = make_transcript(a.clip_id, a.speech_content,
                                     TranscriptSource::annotation, it->second.language);
    double wer = word_error_rate(it->second, hyp);
    if (wer <= t.max_wer) {
      result.kept.records.push_back(a);
    } else {
      result.rejected.push_back({a, wer});
    }
  }
  return result;
}

std::map<std::string, Transcript> load_transcripts(
    const std::filesystem::path& path,
    const std::map<std::string, Language>& clip_languages) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read transcripts: " + path.string());
  std::map<std::string, Transcript> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (!j.is_object()) throw Error("not a JSON object");
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    }
    std::string clip_id;
    std::string text;
    Language lang;
    try {
      clip_id = j.at("clip_id").get<std::string>();
      text = j.at("text").get<std::string>();
      if (j.contains("language")) {
        lang = language_from_string(j.at("language").get<std::string>());
      } else {
        auto it = clip_languages.find(clip_id);
        if (it == clip_languages.end()) throw MissingTranscript(clip_id);
        lang = it->second;
      }
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    }
    if (out.count(clip_id)) throw DuplicateId(clip_id);
    out.emplace(clip_id, make_transcript(clip_id, text, TranscriptSource::asr, lang));
  }
  return out;
}

SemanticVerdict semantic_consistency_check(ChatClient& judge,
                                           const SixDimAnnotation& annotation,
                                           const std::string& independent_description,
                                           const QaThresholds& t, std::string_view rubric) {
  validate(t);
  if (detail::trim(independent_description).empty()) {
    throw EmptyInput("independent description");
  }
  std::string payload;
  payload += "clip_id: " + annotation.clip_id + "\n\n";
  payload += "description A (from the annotation):\n" + annotation.video_description + "\n\n";
  payload += "description B (independent):\n" + independent_description + "\n";
  std::string raw = judge.judge(std::string(rubric), payload);
  SemanticVerdict v;
  v.score = parse_verdict_int(raw, "score", 0, 10);
  v.kept = v.score >= t.min_semantic_score;
  return v;
}

void write_qa_report(const std::vector<QaReportRow>& rows,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write qa report: " + path.string());
  out << "clip_id,wer,semantic_score,kept\n" << std::setprecision(17);
  for (const QaReportRow& r : rows) {
    out << r.clip_id << ',' << r.wer << ',' << r.semantic_score << ','
        << (r.kept ? "true" : "false") << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace saber
