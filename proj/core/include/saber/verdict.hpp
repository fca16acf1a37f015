// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "saber/errors.hpp"

namespace saber {

enum class Relation { consistent, inconsistent };

std::string to_string(Relation r);
Relation relation_from_string(const std::string& s);

// One verdict grammar for every judge in the toolkit: a reply carries lines
// (or inline fragments) of the form `<key>: <value>`. The first occurrence
// of the requested key wins. Key matching is case-insensitive and requires a
// non-identifier character before the key, so "score:" does not match
// "prescore:".

// First `key: <number>` occurrence. Throws UnparseableVerdict when absent,
// OutOfRange when outside [lo, hi].
double parse_verdict_number(const std::string& raw, std::string_view key,
                            double lo, double hi);

// As parse_verdict_number but the value must be integral.
int parse_verdict_int(const std::string& raw, std::string_view key,
                      int lo, int hi);

// All `key: <number>` occurrences in order; exactly `count` expected.
std::vector<double> parse_verdict_numbers(const std::string& raw,
                                          std::string_view key,
                                          std::size_t count,
                                          double lo, double hi);

// First `relation: consistent|inconsistent` occurrence.
Relation parse_verdict_relation(const std::string& raw);

}  // namespace saber
