// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saber/alignment.hpp"
#include "saber/clients.hpp"
#include "saber/preference.hpp"
#include "saber/qa.hpp"

namespace saber {

// The pipeline front end: one entry point per subcommand, shared by the CLI
// binary and the in-process acceptance tests. Every subcommand is
// re-runnable; with the same inputs and seed the output bytes are identical.
//
// Per-subcommand io (input / aux / output):
//   ingest       -                    / -                     / fixture directory
//   filter       raw manifest         / -                     / filtered manifest (+ .rejected.jsonl)
//   annotate     filtered manifest    / -                     / annotated manifest
//   qa-wer       annotated manifest   / transcripts jsonl     / annotated manifest (+ .report.csv)
//   qa-semantic  annotated manifest   / descriptions jsonl    / qa_passed manifest (+ .report.csv)
//   assess       qa_passed manifest   / -                     / assessed manifest
//   build-test   assessed manifest    / -                     / test_set manifest
//   build-prefs  test_set manifest    / -                     / preference manifest
//   sft-toy      -                    / -                     / loss curve csv (+ .policy.txt)
//   dpo-check    -                    / -                     / relative-error table csv
//   dpo-toy      -                    / -                     / loss/margin curve csv (+ .policy.txt)
//   eval-overlap eval pairs jsonl     / -                     / overlap csv
//   eval-sixdim  annotated manifest   / responses jsonl       / six-dimension csv
//   eval-acc     predictions jsonl    / -                     / accuracy text
//   report       consistent sixdim csv/ inconsistent sixdim csv / robustness csv
enum class Subcommand {
  ingest,
  filter,
  annotate,
  qa_wer,
  qa_semantic,
  assess,
  build_test,
  build_prefs,
  sft_toy,
  dpo_check,
  dpo_toy,
  eval_overlap,
  eval_sixdim,
  eval_acc,
  report,
};

inline constexpr std::array<std::string_view, 15> kSubcommandNames = {
    "ingest",     "filter",  "annotate",     "qa-wer",      "qa-semantic",
    "assess",     "build-test", "build-prefs", "sft-toy",   "dpo-check",
    "dpo-toy",    "eval-overlap", "eval-sixdim", "eval-acc", "report",
};

std::string_view subcommand_name(Subcommand sub);
std::optional<Subcommand> subcommand_from_name(std::string_view name);

// mock: deterministic rule-based transports, no network. http: chat
// completions endpoint from the role's ClientConfig.
enum class ClientMode { mock, http };

std::string to_string(ClientMode mode);
ClientMode client_mode_from_string(const std::string& s);

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path aux;  // secondary input, subcommand-dependent
  std::filesystem::path output;
  std::filesystem::path prompts_dir;  // empty: built-in prompt schema

  ClientMode mode = ClientMode::mock;
  ClientConfig generator;  // candidate/annotation generation role
  ClientConfig judge;      // rubric-scoring role
  int jobs = 0;            // parallelism degree; 0 means hardware concurrency

  QaThresholds qa;
  SamplingConfig sampling;
  DpoConfig dpo{0.1, 0.1, 200};
  int sft_steps = 500;

  int total = 1800;      // build-test target size
  int clip_count = 120;  // ingest corpus size
  int instances = 100;   // dpo-check instance count
  double epsilon = 1e-4;    // dpo-check finite-difference step
  double tolerance = 1e-4;  // dpo-check max relative error allowed
  std::uint64_t seed = 20260819;
  bool emit_config = true;  // write the effective-config sidecar
};

// Config file: one JSON object with optional keys mirroring RunConfig
// ("mode", "jobs", "seed", "total", "qa": {"max_wer", "min_semantic_score"},
// "sampling": {"k", "temperature"}, "dpo": {"beta", "learning_rate",
// "steps"}, "sft_steps", "generator"/"judge": {"base_url", "api_key",
// "model_name", "max_in_flight", "timeout_s", "retries", "temperature"},
// ...). Unknown keys throw Error. Flags are applied by the caller after
// this, so flags win.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

// SABER_API_BASE / SABER_API_KEY override both roles when set.
void apply_env(RunConfig& cfg);

// Effective configuration as pretty JSON; api keys are redacted, never
// serialized.
std::string effective_config_json(Subcommand sub, const RunConfig& cfg);

// Sidecar recording the effective config next to the produced artifact:
// <output>.config.json for files, <output>/run.config.json for directories.
std::filesystem::path config_sidecar_path(const std::filesystem::path& output);

// Row of an eval-pairs file: {"id", "reference", "response"} JSON Lines.
struct EvalPair {
  std::string id;
  std::string reference;
  std::string response;

  bool operator==(const EvalPair&) const = default;
};

std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& path);

// Predictions file: {"id", "predicted", "gold"} JSON Lines.
std::vector<std::pair<std::string, std::string>> load_predictions(
    const std::filesystem::path& path);

// Responses file: {"id", "response"} JSON Lines, id unique.
std::map<std::string, std::string> load_responses(const std::filesystem::path& path);

// Runs one stage end to end: reads inputs, writes artifacts plus the config
// sidecar, prints a one-line summary to out. Returns 0 on success, 1 on any
// stage error (diagnostic on err). dpo-check returns 1 when the worst
// relative error exceeds cfg.tolerance.
int run_subcommand(Subcommand sub, const RunConfig& cfg, std::ostream& out,
                   std::ostream& err);

}  // namespace saber
