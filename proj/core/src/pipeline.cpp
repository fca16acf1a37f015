// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "saber/annotation.hpp"
#include "saber/concurrency.hpp"
#include "saber/consistency.hpp"
#include "saber/evalharness.hpp"
#include "saber/manifest.hpp"
#include "saber/sed.hpp"
#include "saber/synthetic.hpp"
#include "saber/verdict.hpp"
#include "textutil.hpp"

namespace saber {

using nlohmann::json;

std::string_view subcommand_name(Subcommand sub) {
  return kSubcommandNames[static_cast<std::size_t>(sub)];
}

std::optional<Subcommand> subcommand_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSubcommandNames.size(); ++i) {
    if (kSubcommandNames[i] == name) return static_cast<Subcommand>(i);
  }
  return std::nullopt;
}

std::string to_string(ClientMode mode) { return mode == ClientMode::mock ? "mock" : "http"; }

ClientMode client_mode_from_string(const std::string& s) {
  if (s == "mock") return ClientMode::mock;
  if (s == "http") return ClientMode::http;
  throw Error("unknown client mode: " + s);
}

namespace {

json must_parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(what + ": " + e.what());
  }
}

void apply_client_section(ClientConfig& c, const json& j, const std::string& section) {
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "base_url") {
        c.base_url = value.get<std::string>();
      } else if (key == "api_key") {
        c.api_key = value.get<std::string>();
      } else if (key == "model_name") {
        c.model_name = value.get<std::string>();
      } else if (key == "max_in_flight") {
        c.max_in_flight = value.get<int>();
      } else if (key == "timeout_s") {
        c.timeout_s = value.get<double>();
      } else if (key == "retries") {
        c.retries = value.get<int>();
      } else if (key == "temperature") {
        c.temperature = value.get<double>();
      } else if (key == "backoff_base_ms") {
        c.backoff_base_ms = value.get<int>();
      } else if (key == "jitter_seed") {
        c.jitter_seed = value.get<std::uint64_t>();
      } else {
        throw Error("config: unknown key `" + section + "." + key + "`");
      }
    } catch (const json::exception& e) {
      throw Error("config: bad value for `" + section + "." + key + "`: " + e.what());
    }
  }
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j = must_parse(text, "config " + path.string());
  if (!j.is_object()) throw Error("config must be a JSON object: " + path.string());

  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "input") {
        cfg.input = value.get<std::string>();
      } else if (key == "aux") {
        cfg.aux = value.get<std::string>();
      } else if (key == "output") {
        cfg.output = value.get<std::string>();
      } else if (key == "prompts_dir") {
        cfg.prompts_dir = value.get<std::string>();
      } else if (key == "mode") {
        cfg.mode = client_mode_from_string(value.get<std::string>());
      } else if (key == "jobs") {
        cfg.jobs = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "total") {
        cfg.total = value.get<int>();
      } else if (key == "clip_count") {
        cfg.clip_count = value.get<int>();
      } else if (key == "instances") {
        cfg.instances = value.get<int>();
      } else if (key == "sft_steps") {
        cfg.sft_steps = value.get<int>();
      } else if (key == "epsilon") {
        cfg.epsilon = value.get<double>();
      } else if (key == "tolerance") {
        cfg.tolerance = value.get<double>();
      } else if (key == "emit_config") {
        cfg.emit_config = value.get<bool>();
      } else if (key == "qa") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "max_wer") {
            cfg.qa.max_wer = v2.get<double>();
          } else if (k2 == "min_semantic_score") {
            cfg.qa.min_semantic_score = v2.get<int>();
          } else {
            throw Error("config: unknown key `qa." + k2 + "`");
          }
        }
      } else if (key == "sampling") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "k") {
            cfg.sampling.k = v2.get<int>();
          } else if (k2 == "temperature") {
            cfg.sampling.temperature = v2.get<double>();
          } else {
            throw Error("config: unknown key `sampling." + k2 + "`");
          }
        }
      } else if (key == "dpo") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "beta") {
            cfg.dpo.beta = v2.get<double>();
          } else if (k2 == "learning_rate") {
            cfg.dpo.learning_rate = v2.get<double>();
          } else if (k2 == "steps") {
            cfg.dpo.steps = v2.get<int>();
          } else {
            throw Error("config: unknown key `dpo." + k2 + "`");
          }
        }
      } else if (key == "generator") {
        apply_client_section(cfg.generator, value, "generator");
      } else if (key == "judge") {
        apply_client_section(cfg.judge, value, "judge");
      } else {
        throw Error("config: unknown key `" + key + "`");
      }
    } catch (const json::exception& e) {
      throw Error("config: bad value for `" + key + "`: " + e.what());
    }
  }
}

void apply_env(RunConfig& cfg) {
  if (const char* base = std::getenv("SABER_API_BASE")) {
    cfg.generator.base_url = base;
    cfg.judge.base_url = base;
  }
  if (const char* key = std::getenv("SABER_API_KEY")) {
    cfg.generator.api_key = key;
    cfg.judge.api_key = key;
  }
}

namespace {

json client_config_json(const ClientConfig& c) {
  json j;
  j["base_url"] = c.base_url;
  j["api_key"] = c.api_key.empty() ? "" : "<redacted>";
  j["model_name"] = c.model_name;
  j["max_in_flight"] = c.max_in_flight;
  j["timeout_s"] = c.timeout_s;
  j["retries"] = c.retries;
  if (c.temperature) j["temperature"] = *c.temperature;
  j["backoff_base_ms"] = c.backoff_base_ms;
  j["jitter_seed"] = c.jitter_seed;
  return j;
}

}  // namespace

std::string effective_config_json(Subcommand sub, const RunConfig& cfg) {
  json j;
  j["subcommand"] = std::string(subcommand_name(sub));
  j["input"] = cfg.input.string();
  j["aux"] = cfg.aux.string();
  j["output"] = cfg.output.string();
  j["prompts_dir"] = cfg.prompts_dir.string();
  j["mode"] = to_string(cfg.mode);
  j["jobs"] = cfg.jobs;
  j["seed"] = cfg.seed;
  j["total"] = cfg.total;
  j["clip_count"] = cfg.clip_count;
  j["instances"] = cfg.instances;
  j["sft_steps"] = cfg.sft_steps;
  j["epsilon"] = cfg.epsilon;
  j["tolerance"] = cfg.tolerance;
  j["qa"] = {{"max_wer", cfg.qa.max_wer}, {"min_semantic_score", cfg.qa.min_semantic_score}};
  j["sampling"] = {{"k", cfg.sampling.k}, {"temperature", cfg.sampling.temperature}};
  j["dpo"] = {{"beta", cfg.dpo.beta},
              {"learning_rate", cfg.dpo.learning_rate},
              {"steps", cfg.dpo.steps}};
  j["generator"] = client_config_json(cfg.generator);
  j["judge"] = client_config_json(cfg.judge);
  return j.dump(2) + "\n";
}

std::filesystem::path config_sidecar_path(const std::filesystem::path& output) {
  std::error_code ec;
  if (std::filesystem::is_directory(output, ec)) return output / "run.config.json";
  std::filesystem::path p = output;
  p.replace_extension(".config.json");
  return p;
}

std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read eval pairs: " + path.string());
  std::vector<EvalPair> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("reference").get<std::string>(),
                     j.at("response").get<std::string>()});
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> load_predictions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read predictions: " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      out.emplace_back(j.at("predicted").get<std::string>(), j.at("gold").get<std::string>());
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    }
  }
  return out;
}

std::map<std::string, std::string> load_responses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read responses: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::string id;
    std::string response;
    try {
      json j = json::parse(line);
      id = j.at("id").get<std::string>();
      response = j.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    }
    if (out.count(id)) throw DuplicateId(id);
    out.emplace(std::move(id), std::move(response));
  }
  return out;
}

namespace {

int effective_jobs(const RunConfig& cfg) {
  if (cfg.jobs >= 1) return cfg.jobs;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::filesystem::path report_path(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p.replace_extension(".report.csv");
  return p;
}

std::filesystem::path policy_path(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p.replace_extension(".policy.txt");
  return p;
}

void emit_sidecar(Subcommand sub, const RunConfig& cfg) {
  if (!cfg.emit_config || cfg.output.empty()) return;
  std::filesystem::path p = config_sidecar_path(cfg.output);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write config sidecar: " + p.string());
  out << effective_config_json(sub, cfg);
  if (!out) throw Error("write failed: " + p.string());
}

void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw Error(std::string(what) + " path required");
}

ChatClient make_stage_client(Subcommand sub, const RunConfig& cfg, bool judge_role) {
  const ClientConfig& base = judge_role ? cfg.judge : cfg.generator;
  if (cfg.mode == ClientMode::http) {
    return ChatClient(std::make_shared<HttpTransport>(base), base);
  }
  std::shared_ptr<MockTransport> mock;
  switch (sub) {
    case Subcommand::annotate: mock = make_annotation_mock(cfg.seed); break;
    case Subcommand::qa_semantic: mock = make_semantic_judge_mock(cfg.seed); break;
    case Subcommand::assess: mock = make_assessment_judge_mock(cfg.seed); break;
    case Subcommand::build_prefs:
      mock = judge_role ? make_preference_judge_mock(cfg.seed) : make_sampling_mock(cfg.seed);
      break;
    case Subcommand::eval_overlap: mock = make_overlap_judge_mock(cfg.seed); break;
    case Subcommand::eval_sixdim: mock = make_sixdim_judge_mock(cfg.seed); break;
    default:
      throw Error("subcommand has no model role: " + std::string(subcommand_name(sub)));
  }
  return ChatClient(std::move(mock), base);
}

template <typename T>
std::vector<T> collect_or_throw(ParallelOutcome<T>&& outcome) {
  for (auto& e : outcome.errors) {
    if (e) std::rethrow_exception(e);
  }
  return std::move(outcome.results);
}

std::map<std::string, std::string> load_clip_texts(const std::filesystem::path& path,
                                                   const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(std::string("cannot read ") + what + ": " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::string id;
    std::string text;
    try {
      json j = json::parse(line);
      id = j.at("clip_id").get<std::string>();
      text = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw MalformedLine(line_number, e.what());
    }
    if (out.count(id)) throw DuplicateId(id);
    out.emplace(std::move(id), std::move(text));
  }
  return out;
}

// --- per-subcommand handlers ---

int run_ingest(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.output, "output");
  FixtureSpec spec;
  spec.clip_count = cfg.clip_count;
  spec.seed = cfg.seed;
  write_fixture_files(cfg.output, spec);
  emit_sidecar(Subcommand::ingest, cfg);
  out << "ingest: wrote fixture corpus (" << cfg.clip_count << " clips) to "
      << cfg.output.string() << "\n";
  return 0;
}

int run_filter(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.output, "output");
  Manifest<Clip> m;
  try {
    m = load_manifest<Clip>(cfg.input, Stage::raw);
  } catch (const StageMismatch&) {
    m = load_manifest<Clip>(cfg.input, Stage::filtered);
  }
  ClipFilterResult result = filter_clips(m);
  save_manifest(result.kept, cfg.output);
  write_clip_rejections(result.rejected, rejected_report_path(cfg.output));
  emit_sidecar(Subcommand::filter, cfg);
  out << "filter: kept " << result.kept.records.size() << ", rejected "
      << result.rejected.size() << " -> " << cfg.output.string() << "\n";
  return 0;
}

int run_annotate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_path(cfg.input, "input");
  require_path(cfg.output, "output");
  Manifest<Clip> clips = load_manifest<Clip>(cfg.input, Stage::filtered);
  PromptSchema schema =
      cfg.prompts_dir.empty() ? default_prompt_schema() : load_prompt_schema(cfg.prompts_dir);
  ChatClient client = make_stage_client(Subcommand::annotate, cfg, false);
  AnnotateRunResult result =
      annotate_manifest(client, schema, clips, effective_jobs(cfg));
  save_manifest(result.annotated, cfg.output);
  emit_sidecar(Subcommand::annotate, cfg);
  for (const auto& [id, reason] : result.skipped) {
    err << "annotate: skipped " << id << ": " << reason << "\n";
  }
  out << "annotate: " << result.annotated.records.size() << " annotated, "
      << result.skipped.size() << " skipped -> " << cfg.output.string() << "\n";
  return 0;
}

int run_qa_wer(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.aux, "aux (transcripts)");
  require_path(cfg.output, "output");
  Manifest<SixDimAnnotation> anns =
      load_manifest<SixDimAnnotation>(cfg.input, Stage::annotated);
  std::map<std::string, Transcript> transcripts = load_transcripts(cfg.aux, {});
  WerFilterResult result = filter_by_wer(anns, transcripts, cfg.qa);
  save_manifest(result.kept, cfg.output);

  std::vector<QaReportRow> rows;
  rows.reserve(anns.records.size());
  for (const SixDimAnnotation& a : anns.records) {
    const Transcript& ref = transcripts.at(a.clip_id);
    Transcript hyp =
        make_transcript(a.clip_id, a.speech_content, TranscriptSource::annotation, ref.language);
    double wer = word_error_rate(ref, hyp);
    rows.push_back({a.clip_id, wer, -1, wer <= cfg.qa.max_wer});
  }
  write_qa_report(rows, report_path(cfg.output));
  emit_sidecar(Subcommand::qa_wer, cfg);
  out << "qa-wer: kept " << result.kept.records.size() << ", rejected "
      << result.rejected.size() << " -> " << cfg.output.string() << "\n";
  return 0;
}

int run_qa_semantic(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.aux, "aux (descriptions)");
  require_path(cfg.output, "output");
  Manifest<SixDimAnnotation> anns =
      load_manifest<SixDimAnnotation>(cfg.input, Stage::annotated);
  std::map<std::string, std::string> descriptions =
      load_clip_texts(cfg.aux, "descriptions");
  ChatClient judge = make_stage_client(Subcommand::qa_semantic, cfg, true);

  auto verdicts = collect_or_throw(parallel_map<SemanticVerdict>(
      anns.records.size(), effective_jobs(cfg), [&](std::size_t i) {
        const SixDimAnnotation& a = anns.records[i];
        auto it = descriptions.find(a.clip_id);
        if (it == descriptions.end()) {
          throw Error("no independent description for clip " + a.clip_id);
        }
        return semantic_consistency_check(judge, a, it->second, cfg.qa);
      }));

  Manifest<SixDimAnnotation> kept;
  kept.stage = Stage::qa_passed;
  std::vector<QaReportRow> rows;
  rows.reserve(anns.records.size());
  for (std::size_t i = 0; i < anns.records.size(); ++i) {
    rows.push_back({anns.records[i].clip_id, -1.0, verdicts[i].score, verdicts[i].kept});
    if (verdicts[i].kept) kept.records.push_back(anns.records[i]);
  }
  save_manifest(kept, cfg.output);
  write_qa_report(rows, report_path(cfg.output));
  emit_sidecar(Subcommand::qa_semantic, cfg);
  out << "qa-semantic: kept " << kept.records.size() << ", rejected "
      << anns.records.size() - kept.records.size() << " -> " << cfg.output.string() << "\n";
  return 0;
}

int run_assess(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.output, "output");
  Manifest<SixDimAnnotation> anns =
      load_manifest<SixDimAnnotation>(cfg.input, Stage::qa_passed);
  ChatClient judge = make_stage_client(Subcommand::assess, cfg, true);

  Manifest<ConsistencyAssessment> assessed;
  assessed.stage = Stage::assessed;
  assessed.records = collect_or_throw(parallel_map<ConsistencyAssessment>(
      anns.records.size(), effective_jobs(cfg),
      [&](std::size_t i) { return assess_consistency(judge, anns.records[i]); }));
  save_manifest(assessed, cfg.output);
  emit_sidecar(Subcommand::assess, cfg);

  std::size_t consistent = 0;
  for (const auto& a : assessed.records) {
    if (a.relation == Relation::consistent) ++consistent;
  }
  out << "assess: " << consistent << " consistent, "
      << assessed.records.size() - consistent << " inconsistent -> "
      << cfg.output.string() << "\n";
  return 0;
}

int run_build_test(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.output, "output");
  Manifest<ConsistencyAssessment> assessed =
      load_manifest<ConsistencyAssessment>(cfg.input, Stage::assessed);
  TestSet ts = assemble_test_set(assessed.records, cfg.total);
  save_manifest(test_set_to_manifest(ts), cfg.output);
  emit_sidecar(Subcommand::build_test, cfg);
  out << "build-test: " << ts.consistent_subset.size() << " consistent + "
      << ts.inconsistent_subset.size() << " inconsistent -> " << cfg.output.string() << "\n";
  return 0;
}

int run_build_prefs(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_path(cfg.input, "input");
  require_path(cfg.output, "output");
  Manifest<TestSetEntry> entries = load_manifest<TestSetEntry>(cfg.input, Stage::test_set);

  std::vector<PreferenceInput> inputs;
  inputs.reserve(entries.records.size());
  for (const TestSetEntry& e : entries.records) {
    inputs.push_back({e.clip_id, e.subset, "subset: " + to_string(e.subset) + "\n"});
  }
  inputs = balance_by_relation(std::move(inputs));

  ChatClient gen = make_stage_client(Subcommand::build_prefs, cfg, false);
  ChatClient judge = make_stage_client(Subcommand::build_prefs, cfg, true);

  struct PerInput {
    std::vector<PreferencePair> pairs;
    bool degenerate = false;
  };
  auto produced = collect_or_throw(parallel_map<PerInput>(
      inputs.size(), effective_jobs(cfg), [&](std::size_t i) {
        const PreferenceInput& in = inputs[i];
        std::vector<std::string> candidates =
            sample_candidates(gen, in.input_id, cfg.sampling, in.prompt_context);
        PerInput r;
        try {
          r.pairs = build_preference_pairs(judge, in.input_id, candidates);
        } catch (const DegenerateScores&) {
          r.degenerate = true;
        }
        return r;
      }));

  Manifest<PreferencePair> prefs;
  prefs.stage = Stage::preference;
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < produced.size(); ++i) {
    if (produced[i].degenerate) {
      ++degenerate;
      err << "build-prefs: skipped " << inputs[i].input_id << ": degenerate scores\n";
      continue;
    }
    for (PreferencePair& p : produced[i].pairs) prefs.records.push_back(std::move(p));
  }
  save_manifest(prefs, cfg.output);
  emit_sidecar(Subcommand::build_prefs, cfg);
  out << "build-prefs: " << prefs.records.size() << " pairs from " << inputs.size()
      << " balanced inputs (" << degenerate << " degenerate) -> " << cfg.output.string()
      << "\n";
  return 0;
}

int run_sft_toy(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.output, "output");
  constexpr std::size_t kLen = 8;
  constexpr std::size_t kVocab = 16;
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> sequence(kLen);
  for (int& t : sequence) t = static_cast<int>(rng() % kVocab);

  ToyPolicy policy(kLen, kVocab, 0.0);  // uniform start: loss = len * ln(vocab)
  DpoConfig train_cfg = cfg.dpo;
  train_cfg.steps = cfg.sft_steps;
  SftResult result = train_toy_sft(policy, {sequence}, train_cfg);

  write_sft_curve_csv(result, cfg.output);
  save_policy(result.policy, policy_path(cfg.output));
  emit_sidecar(Subcommand::sft_toy, cfg);

  double initial = result.curve.empty() ? result.final_loss : result.curve.front();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "sft-toy: loss %.6f -> %.6f over %d steps\n", initial,
                result.final_loss, cfg.sft_steps);
  out << buf;
  return 0;
}

int run_dpo_check(const RunConfig& cfg, std::ostream& out) {
  GradCheckResult result = check_dpo_gradients(cfg.instances, cfg.seed, cfg.epsilon);
  if (!cfg.output.empty()) {
    std::ofstream csv(cfg.output, std::ios::binary);
    if (!csv) throw Error("cannot write table: " + cfg.output.string());
    csv << "instance,relative_error\n" << std::setprecision(17);
    for (std::size_t i = 0; i < result.relative_errors.size(); ++i) {
      csv << i << ',' << result.relative_errors[i] << '\n';
    }
    emit_sidecar(Subcommand::dpo_check, cfg);
  }
  char buf[120];
  for (std::size_t i = 0; i < result.relative_errors.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "instance %3zu: relative error %.3e\n", i,
                  result.relative_errors[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "dpo-check: max relative error %.3e (tolerance %.3e)\n",
                result.max_relative_error, cfg.tolerance);
  out << buf;
  return result.max_relative_error <= cfg.tolerance ? 0 : 1;
}

int run_dpo_toy(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.output, "output");
  constexpr std::size_t kLen = 8;
  constexpr std::size_t kVocab = 16;
  constexpr std::size_t kPairs = 20;
  std::mt19937_64 rng(cfg.seed);
  ToyPolicy ref = ToyPolicy::random(kLen, kVocab, rng(), 0.5);

  std::vector<TokenPair> pairs;
  pairs.reserve(kPairs);
  for (std::size_t p = 0; p < kPairs; ++p) {
    TokenPair tp;
    tp.winner.resize(1 + rng() % kLen);
    for (int& t : tp.winner) t = static_cast<int>(rng() % kVocab);
    do {
      tp.loser.resize(1 + rng() % kLen);
      for (int& t : tp.loser) t = static_cast<int>(rng() % kVocab);
    } while (tp.loser == tp.winner);
    pairs.push_back(std::move(tp));
  }

  DpoTrainResult result = train_toy_dpo(ref, ref, pairs, cfg.dpo);  // policy starts at ref
  write_dpo_curve_csv(result, cfg.output);
  save_policy(result.policy, policy_path(cfg.output));
  emit_sidecar(Subcommand::dpo_toy, cfg);

  double initial = result.curve.empty() ? result.final_loss : result.curve.front().loss;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "dpo-toy: loss %.6f -> %.6f, margin %.6f -> %.6f over %d steps\n", initial,
                result.final_loss, result.curve.empty() ? 0.0 : result.curve.front().margin,
                result.final_margin, cfg.dpo.steps);
  out << buf;
  return 0;
}

int run_eval_overlap(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.output, "output");
  std::vector<EvalPair> pairs = load_eval_pairs(cfg.input);
  if (pairs.empty()) throw EmptyInput("eval pairs");
  ChatClient judge = make_stage_client(Subcommand::eval_overlap, cfg, true);

  auto scores = collect_or_throw(parallel_map<OverlapScore>(
      pairs.size(), effective_jobs(cfg), [&](std::size_t i) {
        return score_overlap(judge, pairs[i].reference, pairs[i].response);
      }));

  std::vector<std::pair<std::string, OverlapScore>> rows;
  rows.reserve(pairs.size());
  double clue_sum = 0.0;
  double label_sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    rows.emplace_back(pairs[i].id, scores[i]);
    clue_sum += scores[i].clue_overlap;
    label_sum += scores[i].label_overlap;
  }
  write_overlap_csv(rows, cfg.output);
  emit_sidecar(Subcommand::eval_overlap, cfg);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "eval-overlap: mean clue %.2f, mean label %.2f over %zu\n",
                clue_sum / static_cast<double>(pairs.size()),
                label_sum / static_cast<double>(pairs.size()), pairs.size());
  out << buf;
  return 0;
}

int run_eval_sixdim(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  require_path(cfg.aux, "aux (responses)");
  require_path(cfg.output, "output");
  Manifest<SixDimAnnotation> refs;
  try {
    refs = load_manifest<SixDimAnnotation>(cfg.input, Stage::annotated);
  } catch (const StageMismatch&) {
    refs = load_manifest<SixDimAnnotation>(cfg.input, Stage::qa_passed);
  }
  if (refs.records.empty()) throw EmptyInput("reference annotations");
  std::map<std::string, std::string> responses = load_responses(cfg.aux);
  ChatClient judge = make_stage_client(Subcommand::eval_sixdim, cfg, true);

  auto scores = collect_or_throw(parallel_map<SixDimScores>(
      refs.records.size(), effective_jobs(cfg), [&](std::size_t i) {
        const SixDimAnnotation& a = refs.records[i];
        auto it = responses.find(a.clip_id);
        if (it == responses.end()) throw Error("no response for clip " + a.clip_id);
        return score_six_dim(judge, a, it->second);
      }));

  std::vector<std::pair<std::string, SixDimScores>> rows;
  rows.reserve(refs.records.size());
  for (std::size_t i = 0; i < refs.records.size(); ++i) {
    rows.emplace_back(refs.records[i].clip_id, scores[i]);
  }
  write_sixdim_csv(rows, cfg.output);
  emit_sidecar(Subcommand::eval_sixdim, cfg);

  out << "eval-sixdim: means over " << rows.size() << " clips:";
  char buf[48];
  for (std::size_t d = 0; d < kSixDimShortNames.size(); ++d) {
    double sum = 0.0;
    for (const auto& [id, s] : rows) sum += dimension_score(s, d);
    std::snprintf(buf, sizeof(buf), " %s %.2f", std::string(kSixDimShortNames[d]).c_str(),
                  sum / static_cast<double>(rows.size()));
    out << buf;
  }
  out << "\n";
  return 0;
}

int run_eval_acc(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input");
  auto predictions = load_predictions(cfg.input);
  double accuracy = aggregate_accuracy(predictions);
  if (!cfg.output.empty()) {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) throw Error("cannot write accuracy report: " + cfg.output.string());
    f << "predictions: " << predictions.size() << "\n" << std::setprecision(17)
      << "accuracy: " << accuracy << "\n";
    emit_sidecar(Subcommand::eval_acc, cfg);
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "eval-acc: accuracy %.4f over %zu predictions\n", accuracy,
                predictions.size());
  out << buf;
  return 0;
}

int run_report(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.input, "input (consistent csv)");
  require_path(cfg.aux, "aux (inconsistent csv)");
  auto cons_rows = read_sixdim_csv(cfg.input);
  auto incons_rows = read_sixdim_csv(cfg.aux);
  std::vector<SixDimScores> cons;
  std::vector<SixDimScores> incons;
  cons.reserve(cons_rows.size());
  incons.reserve(incons_rows.size());
  for (auto& [id, s] : cons_rows) cons.push_back(s);
  for (auto& [id, s] : incons_rows) incons.push_back(s);

  RobustnessReport report = robustness_report(cons, incons);
  if (!cfg.output.empty()) {
    write_robustness_csv(report, cfg.output);
    emit_sidecar(Subcommand::report, cfg);
  }
  out << format_robustness_text(report);
  return 0;
}

}  // namespace

int run_subcommand(Subcommand sub, const RunConfig& cfg, std::ostream& out,
                   std::ostream& err) {
  try {
    switch (sub) {
      case Subcommand::ingest: return run_ingest(cfg, out);
      case Subcommand::filter: return run_filter(cfg, out);
      case Subcommand::annotate: return run_annotate(cfg, out, err);
      case Subcommand::qa_wer: return run_qa_wer(cfg, out);
      case Subcommand::qa_semantic: return run_qa_semantic(cfg, out);
      case Subcommand::assess: return run_assess(cfg, out);
      case Subcommand::build_test: return run_build_test(cfg, out);
      case Subcommand::build_prefs: return run_build_prefs(cfg, out, err);
      case Subcommand::sft_toy: return run_sft_toy(cfg, out);
      case Subcommand::dpo_check: return run_dpo_check(cfg, out);
      case Subcommand::dpo_toy: return run_dpo_toy(cfg, out);
      case Subcommand::eval_overlap: return run_eval_overlap(cfg, out);
      case Subcommand::eval_sixdim: return run_eval_sixdim(cfg, out);
      case Subcommand::eval_acc: return run_eval_acc(cfg, out);
      case Subcommand::report: return run_report(cfg, out);
    }
    throw Error("unknown subcommand value");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace saber
