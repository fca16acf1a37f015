// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/verdict.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>

namespace saber {
namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool key_at(const std::string& raw, std::size_t pos, std::string_view key) {
  if (pos + key.size() > raw.size()) return false;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (lower(raw[pos + i]) != lower(key[i])) return false;
  }
  if (pos > 0 && ident_char(raw[pos - 1])) return false;
  if (pos + key.size() < raw.size() && ident_char(raw[pos + key.size()])) return false;
  return true;
}

// Position just past "key <spaces> : <spaces>" or nullopt.
std::optional<std::size_t> value_start(const std::string& raw, std::size_t key_pos,
                                       std::string_view key) {
  std::size_t i = key_pos + key.size();
  while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) ++i;
  if (i >= raw.size() || raw[i] != ':') return std::nullopt;
  ++i;
  while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) ++i;
  return i;
}

struct NumberMatch {
  double value;
  std::size_t next;  // scan resume position
};

std::optional<NumberMatch> next_number(const std::string& raw, std::string_view key,
                                       std::size_t from) {
  for (std::size_t pos = from; pos < raw.size(); ++pos) {
    if (!key_at(raw, pos, key)) continue;
    auto vs = value_start(raw, pos, key);
    if (!vs) continue;
    const char* begin = raw.c_str() + *vs;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) continue;
    return NumberMatch{v, static_cast<std::size_t>(end - raw.c_str())};
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(Relation r) {
  return r == Relation::consistent ? "consistent" : "inconsistent";
}

Relation relation_from_string(const std::string& s) {
  if (s == "consistent") return Relation::consistent;
  if (s == "inconsistent") return Relation::inconsistent;
  throw Error("unknown relation: " + s);
}

double parse_verdict_number(const std::string& raw, std::string_view key,
                            double lo, double hi) {
  auto m = next_number(raw, key, 0);
  if (!m) throw UnparseableVerdict(raw, "no `" + std::string(key) + ":` value");
  if (!std::isfinite(m->value)) {
    throw UnparseableVerdict(raw, "non-finite `" + std::string(key) + ":` value");
  }
  if (m->value < lo || m->value > hi) throw OutOfRange(raw, m->value, lo, hi);
  return m->value;
}

int parse_verdict_int(const std::string& raw, std::string_view key, int lo, int hi) {
  auto m = next_number(raw, key, 0);
  if (!m) throw UnparseableVerdict(raw, "no `" + std::string(key) + ":` value");
  if (!std::isfinite(m->value) || m->value != std::floor(m->value)) {
    throw UnparseableVerdict(raw, "`" + std::string(key) + ":` value is not an integer");
  }
  if (m->value < lo || m->value > hi) throw OutOfRange(raw, m->value, lo, hi);
  return static_cast<int>(m->value);
}

std::vector<double> parse_verdict_numbers(const std::string& raw, std::string_view key,
                                          std::size_t count, double lo, double hi) {
  std::vector<double> values;
  std::size_t from = 0;
  while (auto m = next_number(raw, key, from)) {
    if (!std::isfinite(m->value)) {
      throw UnparseableVerdict(raw, "non-finite `" + std::string(key) + ":` value");
    }
    values.push_back(m->value);
    from = m->next;
  }
  if (values.size() != count) {
    throw UnparseableVerdict(raw, "expected " + std::to_string(count) + " `" +
                                      std::string(key) + ":` values, found " +
                                      std::to_string(values.size()));
  }
  for (double v : values) {
    if (v < lo || v > hi) throw OutOfRange(raw, v, lo, hi);
  }
  return values;
}

Relation parse_verdict_relation(const std::string& raw) {
  constexpr std::string_view key = "relation";
  for (std::size_t pos = 0; pos < raw.size(); ++pos) {
    if (!key_at(raw, pos, key)) continue;
    auto vs = value_start(raw, pos, key);
    if (!vs) continue;
    std::size_t i = *vs;
    std::string word;
    while (i < raw.size() && ident_char(raw[i])) word.push_back(lower(raw[i++]));
    if (word == "consistent") return Relation::consistent;
    if (word == "inconsistent") return Relation::inconsistent;
    throw UnparseableVerdict(raw, "unknown relation value: " + word);
  }
  throw UnparseableVerdict(raw, "no `relation:` value");
}

}  // namespace saber
