// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "saber/pipeline.hpp"

namespace {

// Flag values parsed by CLI11. Only flags the user actually passed are
// copied onto the RunConfig, so precedence is defaults < config file < env
// < flags.
struct FlagValues {
  std::string config;
  std::string input;
  std::string aux;
  std::string output;
  std::string prompts_dir;
  std::string mode;
  int jobs = 0;
  std::uint64_t seed = 0;
  int total = 0;
  int clip_count = 0;
  int instances = 0;
  int sft_steps = 0;
  double epsilon = 0.0;
  double tolerance = 0.0;
  double max_wer = 0.0;
  int min_semantic_score = 0;
  int k = 0;
  double sample_temperature = 0.0;
  double beta = 0.0;
  double learning_rate = 0.0;
  int steps = 0;
  std::string gen_base_url;
  std::string gen_model;
  double gen_temperature = 0.0;
  std::string judge_base_url;
  std::string judge_model;
  int max_in_flight = 0;
  int retries = 0;
  double timeout_s = 0.0;
  int backoff_ms = 0;
  bool no_config_sidecar = false;
};

void add_common_options(CLI::App* sub, FlagValues& v) {
  sub->add_option("--config", v.config, "JSON config file, applied before flags");
  sub->add_option("-i,--input", v.input, "primary input path");
  sub->add_option("--aux", v.aux, "secondary input path (stage-dependent)");
  sub->add_option("-o,--output", v.output, "output path");
  sub->add_option("--prompts-dir", v.prompts_dir, "prompt schema directory");
  sub->add_option("--mode", v.mode, "client mode")
      ->check(CLI::IsMember({"mock", "http"}));
  sub->add_option("--jobs", v.jobs, "parallel workers (0: hardware concurrency)");
  sub->add_option("--seed", v.seed, "deterministic seed");
  sub->add_option("--total", v.total, "test-set target size (even)");
  sub->add_option("--clip-count", v.clip_count, "fixture corpus size");
  sub->add_option("--instances", v.instances, "gradient-check instance count");
  sub->add_option("--sft-steps", v.sft_steps, "sft-toy update count");
  sub->add_option("--epsilon", v.epsilon, "finite-difference step");
  sub->add_option("--tolerance", v.tolerance, "gradient-check max relative error");
  sub->add_option("--max-wer", v.max_wer, "word error rate admission threshold");
  sub->add_option("--min-semantic-score", v.min_semantic_score,
                  "semantic consistency admission threshold (0-10)");
  sub->add_option("--k", v.k, "candidates sampled per input (>= 4)");
  sub->add_option("--sample-temperature", v.sample_temperature,
                  "candidate sampling temperature");
  sub->add_option("--beta", v.beta, "preference-loss deviation penalty");
  sub->add_option("--learning-rate", v.learning_rate, "toy trainer learning rate");
  sub->add_option("--steps", v.steps, "dpo-toy update count");
  sub->add_option("--gen-base-url", v.gen_base_url, "generator endpoint");
  sub->add_option("--gen-model", v.gen_model, "generator model name");
  sub->add_option("--gen-temperature", v.gen_temperature, "generator temperature");
  sub->add_option("--judge-base-url", v.judge_base_url, "judge endpoint");
  sub->add_option("--judge-model", v.judge_model, "judge model name");
  sub->add_option("--max-in-flight", v.max_in_flight, "request concurrency cap (both roles)");
  sub->add_option("--retries", v.retries, "retry count after first attempt (both roles)");
  sub->add_option("--timeout-s", v.timeout_s, "request timeout in seconds (both roles)");
  sub->add_option("--backoff-ms", v.backoff_ms, "retry backoff base in ms (both roles)");
  sub->add_flag("--no-config-sidecar", v.no_config_sidecar,
                "suppress the effective-config sidecar");
}

constexpr std::string_view kSubcommandHelp[] = {
    "write a deterministic synthetic fixture corpus",
    "admission-filter a raw clip manifest",
    "produce six-dimension annotations for filtered clips",
    "reject annotations whose speech content diverges from the transcript",
    "reject annotations judged semantically inconsistent",
    "assess audio-visual relation and intensity per clip",
    "assemble the balanced consistent/inconsistent test set",
    "sample candidates and build scored preference pairs",
    "train the toy policy on sequence NLL",
    "verify analytic preference gradients against finite differences",
    "train the toy policy on preference pairs",
    "judge clue/label overlap of responses against references",
    "judge responses per annotation dimension",
    "exact-match accuracy of a predictions file",
    "per-dimension robustness deltas from two score tables",
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dataset curation and preference alignment toolkit for audio-visual emotion reasoning"};
  app.set_version_flag("--version", "saber 0.1.0");
  app.require_subcommand(1);

  FlagValues v;
  for (std::size_t i = 0; i < saber::kSubcommandNames.size(); ++i) {
    CLI::App* sub = app.add_subcommand(std::string(saber::kSubcommandNames[i]),
                                       std::string(kSubcommandHelp[i]));
    add_common_options(sub, v);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  saber::Subcommand sc = *saber::subcommand_from_name(sub->get_name());

  saber::RunConfig cfg;
  try {
    if (sub->count("--config") > 0) saber::apply_config_file(cfg, v.config);
    saber::apply_env(cfg);

    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--input")) cfg.input = v.input;
    if (given("--aux")) cfg.aux = v.aux;
    if (given("--output")) cfg.output = v.output;
    if (given("--prompts-dir")) cfg.prompts_dir = v.prompts_dir;
    if (given("--mode")) cfg.mode = saber::client_mode_from_string(v.mode);
    if (given("--jobs")) cfg.jobs = v.jobs;
    if (given("--seed")) cfg.seed = v.seed;
    if (given("--total")) cfg.total = v.total;
    if (given("--clip-count")) cfg.clip_count = v.clip_count;
    if (given("--instances")) cfg.instances = v.instances;
    if (given("--sft-steps")) cfg.sft_steps = v.sft_steps;
    if (given("--epsilon")) cfg.epsilon = v.epsilon;
    if (given("--tolerance")) cfg.tolerance = v.tolerance;
    if (given("--max-wer")) cfg.qa.max_wer = v.max_wer;
    if (given("--min-semantic-score")) cfg.qa.min_semantic_score = v.min_semantic_score;
    if (given("--k")) cfg.sampling.k = v.k;
    if (given("--sample-temperature")) cfg.sampling.temperature = v.sample_temperature;
    if (given("--beta")) cfg.dpo.beta = v.beta;
    if (given("--learning-rate")) cfg.dpo.learning_rate = v.learning_rate;
    if (given("--steps")) cfg.dpo.steps = v.steps;
    if (given("--gen-base-url")) cfg.generator.base_url = v.gen_base_url;
    if (given("--gen-model")) cfg.generator.model_name = v.gen_model;
    if (given("--gen-temperature")) cfg.generator.temperature = v.gen_temperature;
    if (given("--judge-base-url")) cfg.judge.base_url = v.judge_base_url;
    if (given("--judge-model")) cfg.judge.model_name = v.judge_model;
    if (given("--max-in-flight")) {
      cfg.generator.max_in_flight = v.max_in_flight;
      cfg.judge.max_in_flight = v.max_in_flight;
    }
    if (given("--retries")) {
      cfg.generator.retries = v.retries;
      cfg.judge.retries = v.retries;
    }
    if (given("--timeout-s")) {
      cfg.generator.timeout_s = v.timeout_s;
      cfg.judge.timeout_s = v.timeout_s;
    }
    if (given("--backoff-ms")) {
      cfg.generator.backoff_base_ms = v.backoff_ms;
      cfg.judge.backoff_base_ms = v.backoff_ms;
    }
    if (v.no_config_sidecar) cfg.emit_config = false;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  return saber::run_subcommand(sc, cfg, std::cout, std::cerr);
}
