// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saber {

// Base class for every error the toolkit raises on purpose. Callers that
// only care about "stage failed" catch this; callers with recovery logic
// catch the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- manifest / corpus ---

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_number, const std::string& detail)
      : Error("malformed line " + std::to_string(line_number) + ": " + detail),
        line_number(line_number) {}
  std::size_t line_number;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(std::string id_)
      : Error("duplicate id: " + id_), id(std::move(id_)) {}
  std::string id;
};

class StageMismatch : public Error {
 public:
  StageMismatch(const std::string& expected, const std::string& found)
      : Error("stage mismatch: expected " + expected + ", found " + found) {}
};

// --- templates / annotation ---

class TemplateError : public Error {
 public:
  explicit TemplateError(std::string placeholder_)
      : Error("unresolved placeholder: {" + placeholder_ + "}"),
        placeholder(std::move(placeholder_)) {}
  std::string placeholder;
};

class EmptyDimension : public Error {
 public:
  explicit EmptyDimension(std::string dimension_)
      : Error("empty annotation dimension: " + dimension_),
        dimension(std::move(dimension_)) {}
  std::string dimension;
};

// --- clients ---

class ClientError : public Error {
 public:
  ClientError(int status_, std::string body_)
      : Error("client error, status " + std::to_string(status_) +
              (body_.empty() ? "" : ": " + body_)),
        status(status_),
        body(std::move(body_)) {}
  int status;
  std::string body;
};

class Timeout : public ClientError {
 public:
  explicit Timeout(std::string detail) : ClientError(0, std::move(detail)) {}
};

class RetriesExhausted : public ClientError {
 public:
  RetriesExhausted(int attempts, int last_status, std::string last_body)
      : ClientError(last_status, std::move(last_body)), attempts(attempts) {}
  int attempts;
};

// --- qa ---

class EmptyReference : public Error {
 public:
  EmptyReference() : Error("reference transcript is empty") {}
};

class MissingTranscript : public Error {
 public:
  explicit MissingTranscript(std::string clip_id_)
      : Error("no ASR transcript for clip: " + clip_id_),
        clip_id(std::move(clip_id_)) {}
  std::string clip_id;
};

// Raised when a judge reply does not contain the expected verdict line.
class UnparseableVerdict : public Error {
 public:
  explicit UnparseableVerdict(std::string raw_, const std::string& detail = "")
      : Error("unparseable judge verdict" + (detail.empty() ? "" : ": " + detail)),
        raw(std::move(raw_)) {}
  std::string raw;
};

// A verdict line parsed but its value fell outside the declared range.
// Derives from UnparseableVerdict so range violations also satisfy the
// looser contract of modules that do not distinguish the two.
class OutOfRange : public UnparseableVerdict {
 public:
  OutOfRange(std::string raw, double value, double lo, double hi)
      : UnparseableVerdict(std::move(raw),
                           "value " + std::to_string(value) + " outside [" +
                               std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        value(value) {}
  double value;
};

// --- consistency ---

class InsufficientSamples : public Error {
 public:
  InsufficientSamples(std::string relation_, std::size_t available_, std::size_t needed_)
      : Error("insufficient " + relation_ + " samples: have " +
              std::to_string(available_) + ", need " + std::to_string(needed_)),
        relation(std::move(relation_)),
        available(available_),
        needed(needed_) {}
  std::string relation;
  std::size_t available;
  std::size_t needed;
};

// --- sed ---

class EmptySegment : public Error {
 public:
  explicit EmptySegment(std::string name_)
      : Error("empty triplet segment: " + name_), name(std::move(name_)) {}
  std::string name;
};

class MissingSection : public Error {
 public:
  explicit MissingSection(std::string name_)
      : Error("missing section: " + name_), name(std::move(name_)) {}
  std::string name;
};

class DuplicateSection : public Error {
 public:
  explicit DuplicateSection(std::string name_)
      : Error("duplicate section: " + name_), name(std::move(name_)) {}
  std::string name;
};

class OutOfOrder : public Error {
 public:
  explicit OutOfOrder(std::string found_order_)
      : Error("sections out of order: " + found_order_),
        found_order(std::move(found_order_)) {}
  std::string found_order;
};

class PositiveLogProb : public Error {
 public:
  explicit PositiveLogProb(std::size_t index_)
      : Error("positive log-probability at index " + std::to_string(index_)),
        index(index_) {}
  std::size_t index;
};

// --- alignment ---

class TokenOutOfRange : public Error {
 public:
  TokenOutOfRange(std::size_t position, int token)
      : Error("token " + std::to_string(token) + " at position " +
              std::to_string(position) + " outside policy vocabulary") {}
};

class NonFiniteInput : public Error {
 public:
  explicit NonFiniteInput(const std::string& what_field)
      : Error("non-finite input: " + what_field) {}
};

// --- preference ---

class DegenerateScores : public Error {
 public:
  explicit DegenerateScores(std::string input_id_)
      : Error("all candidate scores identical for input: " + input_id_),
        input_id(std::move(input_id_)) {}
  std::string input_id;
};

// --- eval ---

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what_field)
      : Error("empty input: " + what_field) {}
};

}  // namespace saber
