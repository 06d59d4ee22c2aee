// Copyright 2026 The layerbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <unistd.h>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_config.hpp"
#include "layerbench/apply_gen.hpp"
#include "layerbench/corpus.hpp"
#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/harness.hpp"
#include "layerbench/inject.hpp"
#include "layerbench/llm.hpp"
#include "layerbench/patch_eval.hpp"
#include "layerbench/report.hpp"
#include "layerbench/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace layerbench;

// Values shared by the subcommands. CLI flags win; a config file fills in
// whatever was not passed on the command line.
struct CommonArgs {
  std::string config_path;
  std::string corpus;
  std::string llm_mode = "replay";
  std::string transcripts = "transcripts";
  std::string template_dir;
  double timeout_s = 120.0;
};

CliConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return parse_config_file(path);
}

// Overwrites `value` from the config when the flag was not given on the
// command line.
void fill(const CLI::App& cmd, const CliConfig& config, const std::string& section,
          const std::string& key, std::string& value) {
  if (cmd.get_option("--" + key)->count() > 0) return;
  const std::string found = config.lookup(section, key);
  if (!found.empty()) value = found;
}

void fill(const CLI::App& cmd, const CliConfig& config, const std::string& section,
          const std::string& key, std::int64_t& value) {
  std::string text;
  fill(cmd, config, section, key, text);
  if (text.empty()) return;
  try {
    value = std::stoll(text);
  } catch (const std::exception&) {
    throw Error(kErrConfig, "key '" + key + "': not an integer: " + text);
  }
}

void fill(const CLI::App& cmd, const CliConfig& config, const std::string& section,
          const std::string& key, int& value) {
  std::int64_t wide = value;
  fill(cmd, config, section, key, wide);
  value = static_cast<int>(wide);
}

void fill(const CLI::App& cmd, const CliConfig& config, const std::string& section,
          const std::string& key, double& value) {
  std::string text;
  fill(cmd, config, section, key, text);
  if (text.empty()) return;
  try {
    value = std::stod(text);
  } catch (const std::exception&) {
    throw Error(kErrConfig, "key '" + key + "': not a number: " + text);
  }
}

void fill_common(const CLI::App& cmd, const CliConfig& config,
                 const std::string& section, CommonArgs& args) {
  fill(cmd, config, section, "corpus", args.corpus);
  fill(cmd, config, section, "llm-mode", args.llm_mode);
  fill(cmd, config, section, "transcripts", args.transcripts);
  fill(cmd, config, section, "template-dir", args.template_dir);
  fill(cmd, config, section, "timeout", args.timeout_s);
}

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_llm) {
  cmd->add_option("--config", args.config_path, "Config file mirroring the flags");
  cmd->add_option("--corpus", args.corpus, "Corpus root (directory with manifest.json)");
  cmd->add_option("--timeout", args.timeout_s, "Build/test timeout in seconds");
  if (with_llm) {
    cmd->add_option("--llm-mode", args.llm_mode, "live, record or replay");
    cmd->add_option("--transcripts", args.transcripts, "Transcript directory");
    cmd->add_option("--template-dir", args.template_dir,
                    "Prompt template directory (default: built-ins)");
  }
}

Benchmark load_corpus(const CommonArgs& args) {
  if (args.corpus.empty()) {
    throw Error(kErrBadArgs, "--corpus is required");
  }
  return load_manifest(args.corpus);
}

ProviderConfig provider_from(const CliConfig& config) {
  ProviderConfig provider;
  const auto it = config.sections.find("provider");
  if (it == config.sections.end()) return provider;
  const auto& section = it->second;
  auto get = [&section](const char* key) -> std::string {
    const auto found = section.find(key);
    return found == section.end() ? "" : found->second;
  };
  if (!get("endpoint").empty()) provider.endpoint = get("endpoint");
  if (!get("model").empty()) provider.model = get("model");
  if (!get("api_key_env").empty()) provider.api_key_env = get("api_key_env");
  if (!get("temperature").empty()) provider.temperature = std::stod(get("temperature"));
  if (!get("max_tokens").empty()) provider.max_tokens = std::stoi(get("max_tokens"));
  if (!get("timeout_s").empty()) provider.timeout_s = std::stod(get("timeout_s"));
  return provider;
}

std::unique_ptr<LlmGateway> make_gateway(const CommonArgs& args,
                                         const CliConfig& config) {
  const LlmMode mode = llm_mode_from_string(args.llm_mode);
  return std::make_unique<LlmGateway>(mode, fs::path(args.transcripts),
                                      provider_from(config),
                                      fs::path(args.template_dir));
}

fs::path fresh_scratch(const std::string& label) {
  return fs::temp_directory_path() /
         ("layerbench-" + label + "-" + std::to_string(::getpid()));
}

std::vector<LayerTag> parse_layers(const std::vector<std::string>& names) {
  std::vector<LayerTag> layers;
  for (const std::string& name : names) layers.push_back(layer_from_string(name));
  return layers;
}

int run_lint(const CLI::App& cmd, CommonArgs args) {
  const CliConfig config = load_config(args.config_path);
  fill_common(cmd, config, "lint", args);
  const Benchmark bench = load_corpus(args);

  const fs::path scratch = fresh_scratch("lint");
  LintReport report;
  try {
    report = lint_corpus(bench, scratch, {args.timeout_s});
  } catch (...) {
    fs::remove_all(scratch);
    throw;
  }
  fs::remove_all(scratch);

  for (const LintIssue& issue : report.issues) {
    std::cout << "FAIL " << issue.id << ": " << issue.detail << "\n";
  }
  if (!report.ok()) {
    throw Error(kErrLintFailed,
                std::to_string(report.issues.size()) + " of " +
                    std::to_string(report.checked) +
                    " instances violate the fail-then-pass contract");
  }
  std::cout << "lint ok: " << report.checked << " instances, corpus digest "
            << bench.corpus_digest() << "\n";
  return 0;
}

struct GenApplyArgs {
  CommonArgs common;
  std::string scheme;
  std::string targets;
  std::int64_t stamp = 0;
};

int run_gen_apply(const CLI::App& cmd, GenApplyArgs args) {
  const CliConfig config = load_config(args.common.config_path);
  fill_common(cmd, config, "gen.apply", args.common);
  fill(cmd, config, "gen.apply", "scheme", args.scheme);
  fill(cmd, config, "gen.apply", "targets", args.targets);
  fill(cmd, config, "gen.apply", "stamp", args.stamp);

  Benchmark bench = load_corpus(args.common);
  ApplyGenOptions options;
  options.clock_stamp = static_cast<std::uint64_t>(args.stamp);
  bool needs_gateway = true;
  if (!args.scheme.empty()) {
    std::string targets = args.targets;
    if (targets.empty()) {
      if (args.scheme == "comments") {
        throw Error(kErrBadArgs, "--targets is required for the comments scheme");
      }
      targets = "both";
    }
    options.variations = {{args.scheme, targets}};
    needs_gateway = args.scheme == "rephrase";
  }

  std::unique_ptr<LlmGateway> gateway;
  if (needs_gateway) gateway = make_gateway(args.common, config);
  const ApplyGenReport report = generate_apply_layer(bench, options, gateway.get());

  for (const ApplyExclusion& exclusion : report.exclusions) {
    std::cout << "excluded " << exclusion.bug_id << " " << exclusion.scheme << "/"
              << exclusion.targets << ": " << exclusion.reason << "\n";
  }
  std::cout << "apply layer: " << report.registered << " variants registered, "
            << report.excluded << " excluded\n";
  return 0;
}

struct GenUnderstandArgs {
  CommonArgs common;
  std::string mode = "root_cause";
  int candidates = 5;
};

int run_gen_understand(const CLI::App& cmd, GenUnderstandArgs args) {
  const CliConfig config = load_config(args.common.config_path);
  fill_common(cmd, config, "gen.understand", args.common);
  fill(cmd, config, "gen.understand", "mode", args.mode);
  fill(cmd, config, "gen.understand", "candidates", args.candidates);

  Benchmark bench = load_corpus(args.common);
  std::unique_ptr<LlmGateway> gateway = make_gateway(args.common, config);

  SynthOptions options;
  options.candidates_per_bug = args.candidates;
  const SynthReport report = build_understand_layer(
      bench, synth_mode_from_string(args.mode), *gateway, options);

  for (const SynthYield& yield : report.yields) {
    std::cout << yield.bug_id << ": requested " << yield.requested << ", verified "
              << yield.verified << ", rejected " << yield.rejected << "\n";
  }
  for (const std::string& bug : report.uncovered) {
    std::cout << "uncovered: " << bug << "\n";
  }
  for (const std::string& error : report.errors) {
    std::cout << "error: " << error << "\n";
  }
  std::cout << "understand layer: " << report.registered << " variants registered\n";
  return 0;
}

struct GenAnalyzeArgs {
  CommonArgs common;
  std::string search_export;
  std::string workspace;
};

int run_gen_analyze(const CLI::App& cmd, GenAnalyzeArgs args) {
  const CliConfig config = load_config(args.common.config_path);
  fill_common(cmd, config, "gen.analyze", args.common);
  fill(cmd, config, "gen.analyze", "search-export", args.search_export);
  fill(cmd, config, "gen.analyze", "workspace", args.workspace);
  if (args.search_export.empty() || args.workspace.empty()) {
    throw Error(kErrBadArgs, "--search-export and --workspace are required");
  }

  Benchmark bench = load_corpus(args.common);
  std::unique_ptr<LlmGateway> gateway = make_gateway(args.common, config);

  const InjectReport report =
      build_analyze_layer(bench, args.search_export, args.workspace, *gateway);

  for (const std::string& reason : report.ingest.dropped) {
    std::cout << "dropped: " << reason << "\n";
  }
  for (const InjectYield& yield : report.yields) {
    std::cout << yield.parent_id << ": candidates " << yield.candidates << ", verified "
              << yield.verified << ", rejected " << yield.rejected << "\n";
  }
  for (const std::string& bug : report.uncovered) {
    std::cout << "uncovered: " << bug << "\n";
  }
  for (const std::string& error : report.errors) {
    std::cout << "error: " << error << "\n";
  }
  std::cout << "analyze layer: " << report.registered << " variants registered\n";
  return 0;
}

struct RunArgs {
  CommonArgs common;
  std::vector<std::string> layers;
  std::string adapter;
  std::string out = "runs";
  std::string run_id;
  int workers = 1;
};

int run_run(const CLI::App& cmd, RunArgs args) {
  const CliConfig config = load_config(args.common.config_path);
  fill_common(cmd, config, "run", args.common);
  fill(cmd, config, "run", "adapter", args.adapter);
  fill(cmd, config, "run", "out", args.out);
  fill(cmd, config, "run", "run-id", args.run_id);
  fill(cmd, config, "run", "workers", args.workers);
  if (cmd.get_option("--layer")->count() == 0) {
    const std::string listed = config.lookup("run", "layer");
    if (!listed.empty()) {
      args.layers.clear();
      std::size_t begin = 0;
      while (begin <= listed.size()) {
        const std::size_t comma = listed.find(',', begin);
        const std::string name = listed.substr(
            begin, comma == std::string::npos ? std::string::npos : comma - begin);
        if (!name.empty()) args.layers.push_back(name);
        if (comma == std::string::npos) break;
        begin = comma + 1;
      }
    }
  }
  if (args.layers.empty()) args.layers = {"remember"};
  if (args.adapter.empty()) {
    throw Error(kErrBadArgs, "--adapter is required");
  }

  const auto section = config.sections.find("adapter." + args.adapter);
  if (section == config.sections.end()) {
    throw Error(kErrConfig,
                "adapter '" + args.adapter + "' is not defined in the config file");
  }
  SueAdapter adapter;
  adapter.id = args.adapter;
  const auto& keys = section->second;
  if (keys.count("invoke_cmd")) adapter.invoke_cmd = keys.at("invoke_cmd");
  if (keys.count("attempt_budget")) adapter.attempt_budget = std::stoi(keys.at("attempt_budget"));
  if (keys.count("timeout_s")) adapter.timeout_s = std::stod(keys.at("timeout_s"));

  const Benchmark bench = load_corpus(args.common);
  CampaignConfig campaign;
  campaign.run_id = args.run_id.empty() ? args.adapter : args.run_id;
  campaign.runs_root = args.out;
  campaign.workers = args.workers;
  campaign.judge_timeout_s = args.common.timeout_s;

  const CampaignResult result =
      run_campaign(bench, parse_layers(args.layers), adapter, campaign);
  for (const CampaignFailure& failure : result.failures) {
    std::cout << "failed " << failure.variant_id << ": " << failure.error << "\n";
  }
  std::cout << "run " << campaign.run_id << ": " << result.jobs_total << " tasks, "
            << result.jobs_run << " executed, " << result.jobs_skipped
            << " already ledgered, " << result.failures.size() << " failures\n";
  std::cout << "ledger: " << result.ledger_path.string() << "\n";
  return 0;
}

struct ReportArgs {
  CommonArgs common;
  std::vector<std::string> runs;
  std::vector<std::string> formats;
  std::string out = "report";
  double alpha = 0.05;
};

int run_report(const CLI::App& cmd, ReportArgs args) {
  const CliConfig config = load_config(args.common.config_path);
  fill_common(cmd, config, "report", args.common);
  fill(cmd, config, "report", "out", args.out);
  fill(cmd, config, "report", "alpha", args.alpha);
  if (args.runs.empty()) {
    throw Error(kErrBadArgs, "at least one --run directory is required");
  }

  ReportRequest request;
  for (const std::string& run : args.runs) request.run_dirs.push_back(run);
  request.alpha = args.alpha;
  Benchmark bench;
  if (!args.common.corpus.empty()) {
    bench = load_manifest(args.common.corpus);
    request.corpus = &bench;
  }

  std::vector<ReportFormat> formats;
  for (const std::string& name : args.formats) {
    if (name == "markdown" || name == "md") {
      formats.push_back(ReportFormat::kMarkdown);
    } else if (name == "csv") {
      formats.push_back(ReportFormat::kCsv);
    } else if (name == "json") {
      formats.push_back(ReportFormat::kJson);
    } else {
      throw Error(kErrBadArgs, "unknown report format '" + name + "'");
    }
  }
  if (formats.empty()) {
    formats = {ReportFormat::kMarkdown, ReportFormat::kCsv, ReportFormat::kJson};
  }

  const ReportFiles files = emit_report(request, args.out, formats);
  for (const fs::path& file : {files.markdown, files.csv, files.json}) {
    if (!file.empty()) std::cout << "wrote " << file.string() << "\n";
  }
  return 0;
}

struct PatchOfArgs {
  CommonArgs common;
  std::string id;
  std::string side = "fixed";
};

// Adapter helper: prints the reference fixed (or buggy) function of an
// instance as a one-line patch, the format adapters must write.
int run_patch_of(const CLI::App& cmd, PatchOfArgs args) {
  const CliConfig config = load_config(args.common.config_path);
  fill_common(cmd, config, "patch-of", args.common);
  if (args.id.empty()) {
    throw Error(kErrBadArgs, "--id is required");
  }
  if (args.side != "fixed" && args.side != "buggy") {
    throw Error(kErrBadArgs, "--side must be fixed or buggy");
  }

  const Benchmark bench = load_corpus(args.common);
  const BugInstance* instance = bench.find_instance(args.id);
  if (instance == nullptr) {
    throw Error(kErrBadArgs, "unknown instance id '" + args.id + "'");
  }

  nlohmann::json patch;
  patch["bug_id"] = instance->id;
  patch["variant_id"] = instance->id;
  patch["attempt"] = 1;
  patch["file"] = instance->buggy_file.generic_string();
  patch["function_name"] = instance->function_name;
  patch["replacement"] = args.side == "fixed" ? instance->fixed_function.text
                                              : instance->buggy_function.text;
  std::cout << patch.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered bug-fix benchmark toolkit"};
  app.require_subcommand(1);

  CommonArgs lint_args;
  CLI::App* lint = app.add_subcommand("lint", "Check the fail-then-pass contract");
  add_common_flags(lint, lint_args, /*with_llm=*/false);

  CLI::App* gen = app.add_subcommand("gen", "Generate evaluation layers");
  gen->require_subcommand(1);

  GenApplyArgs apply_args;
  CLI::App* gen_apply = gen->add_subcommand("apply", "Lexically perturbed variants");
  add_common_flags(gen_apply, apply_args.common, /*with_llm=*/true);
  gen_apply->add_option("--scheme", apply_args.scheme,
                        "hash, rephrase or comments (default: all variations)");
  gen_apply->add_option("--targets", apply_args.targets,
                        "vars, funcs, both, or a comment mode");
  gen_apply->add_option("--stamp", apply_args.stamp,
                        "Clock stamp pinning generated names");

  GenUnderstandArgs understand_args;
  CLI::App* gen_understand =
      gen->add_subcommand("understand", "Synthesized sibling bugs");
  add_common_flags(gen_understand, understand_args.common, /*with_llm=*/true);
  gen_understand->add_option("--mode", understand_args.mode, "root_cause or behavior");
  gen_understand->add_option("--candidates", understand_args.candidates,
                             "Verified variants to aim for per bug (1-5)");

  GenAnalyzeArgs analyze_args;
  CLI::App* gen_analyze =
      gen->add_subcommand("analyze", "Bugs injected into host projects");
  add_common_flags(gen_analyze, analyze_args.common, /*with_llm=*/true);
  gen_analyze->add_option("--search-export", analyze_args.search_export,
                          "Clone-candidate JSONL from the code search step");
  gen_analyze->add_option("--workspace", analyze_args.workspace,
                          "Directory with mirrors/<repo> checkouts");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Evaluate an adapter over layers");
  add_common_flags(run, run_args.common, /*with_llm=*/false);
  run->add_option("--layer", run_args.layers,
                  "Layer to evaluate (repeatable): remember, understand, apply, analyze");
  run->add_option("--adapter", run_args.adapter, "Adapter section name in the config");
  run->add_option("--workers", run_args.workers, "Parallel judge workers");
  run->add_option("--out", run_args.out, "Runs root directory");
  run->add_option("--run-id", run_args.run_id, "Run name (default: adapter id)");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Render tables from run ledgers");
  add_common_flags(report, report_args.common, /*with_llm=*/false);
  report->add_option("--run", report_args.runs, "Run directory (repeatable)");
  report->add_option("--format", report_args.formats,
                     "markdown, csv or json (repeatable; default all)");
  report->add_option("--out", report_args.out, "Output directory");
  report->add_option("--alpha", report_args.alpha, "Significance level for deltas");

  PatchOfArgs patch_args;
  CLI::App* patch_of =
      app.add_subcommand("patch-of", "Print a reference patch line (adapter helper)");
  add_common_flags(patch_of, patch_args.common, /*with_llm=*/false);
  patch_of->add_option("--id", patch_args.id, "Instance id");
  patch_of->add_option("--side", patch_args.side, "fixed (default) or buggy");

  try {
    app.parse(argc, argv);
    if (lint->parsed()) return run_lint(*lint, lint_args);
    if (gen_apply->parsed()) return run_gen_apply(*gen_apply, apply_args);
    if (gen_understand->parsed()) {
      return run_gen_understand(*gen_understand, understand_args);
    }
    if (gen_analyze->parsed()) return run_gen_analyze(*gen_analyze, analyze_args);
    if (run->parsed()) return run_run(*run, run_args);
    if (report->parsed()) return run_report(*report, report_args);
    if (patch_of->parsed()) return run_patch_of(*patch_of, patch_args);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_BAD_ARGS: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == kErrRunNotFound ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
}
