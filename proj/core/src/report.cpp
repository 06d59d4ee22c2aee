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

#include "layerbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"

namespace layerbench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* const kMetricKeys[] = {"pp", "sye", "em"};
const char* const kMetricLabels[] = {"PP", "SYE", "EM"};
const FixClass kAllClasses[] = {FixClass::kFix0, FixClass::kFix1, FixClass::kFixPlus,
                                FixClass::kFixAll};

int layer_rank(LayerTag layer) { return static_cast<int>(layer); }

std::string config_id_of(const LedgerEntry& entry) {
  std::string id = entry.producer + "/" + to_string(entry.layer) + "/" + entry.scheme;
  if (!entry.targets.empty()) id += "-" + entry.targets;
  return id;
}

std::string format_p(double p) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", p);
  return buffer;
}

bool metric_solved(const LedgerEntry& entry, const std::string& metric) {
  if (metric == "pp") return entry.pp;
  if (metric == "sye") return entry.sye;
  return entry.em;
}

int class_count(const LayerReport& report, FixClass cls) {
  const auto it = report.class_distribution.find(cls);
  return it == report.class_distribution.end() ? 0 : it->second;
}

}  // namespace

RunData load_run(const fs::path& run_dir) {
  const fs::path meta_path = run_dir / "run.json";
  if (!fs::exists(meta_path)) {
    throw Error(kErrRunNotFound, "no run metadata at " + meta_path.string());
  }
  RunData run;
  try {
    const json meta = json::parse(read_file(meta_path));
    run.run_id = meta.at("run_id").get<std::string>();
    run.adapter = meta.at("adapter").get<std::string>();
    run.corpus_name = meta.value("corpus_name", "");
    run.corpus_digest = meta.value("corpus_digest", "");
  } catch (const json::exception& e) {
    throw Error(kErrRunNotFound, "unreadable run metadata: " + std::string(e.what()));
  }
  run.entries = read_ledger(run_dir / "ledger.jsonl");
  return run;
}

ReportBundle build_report(const ReportRequest& request) {
  if (request.run_dirs.empty()) {
    throw Error(kErrBadArgs, "no run directories given");
  }

  ReportBundle bundle;
  bundle.alpha = request.alpha;

  std::vector<LedgerEntry> variants;
  std::vector<LedgerEntry> patches;
  std::set<std::pair<std::string, std::string>> seen;  // (producer, variant id)
  for (const fs::path& dir : request.run_dirs) {
    RunData run = load_run(dir);
    for (LedgerEntry& entry : run.entries) {
      if (entry.kind == "variant") {
        if (seen.insert({entry.producer, entry.variant_id}).second) {
          variants.push_back(std::move(entry));
        }
      } else {
        patches.push_back(std::move(entry));
      }
    }
    run.entries.clear();
    bundle.runs.push_back(std::move(run));
  }

  // Every judged patch must belong to a completed task, and, when the
  // corpus is at hand, every registered instance of a reported layer must
  // have been judged by each adapter.
  std::vector<std::string> missing;
  for (const LedgerEntry& patch : patches) {
    if (!seen.count({patch.producer, patch.variant_id})) {
      missing.push_back(patch.producer + ":" + patch.bug_id + "/" + patch.variant_id);
    }
  }
  if (request.corpus != nullptr) {
    std::map<std::string, std::set<LayerTag>> layers_by_producer;
    for (const LedgerEntry& entry : variants) {
      layers_by_producer[entry.producer].insert(entry.layer);
    }
    for (const auto& [producer, layers] : layers_by_producer) {
      for (LayerTag layer : layers) {
        for (const BugInstance* instance : request.corpus->instances_of_layer(layer)) {
          if (!seen.count({producer, instance->id})) {
            missing.push_back(producer + ":" + instance->id);
          }
        }
      }
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string joined;
    for (const std::string& pair : missing) {
      joined += joined.empty() ? pair : ", " + pair;
    }
    throw Error(kErrLedgerIncomplete, "missing ledger records for: " + joined);
  }

  // Group variant records into configurations, preserving ledger order for
  // the matrix rows.
  struct Group {
    ConfigReport config;
    std::vector<const LedgerEntry*> entries;
  };
  std::map<std::string, Group> groups;
  for (const LedgerEntry& entry : variants) {
    const std::string id = config_id_of(entry);
    Group& group = groups[id];
    if (group.entries.empty()) {
      group.config.config_id = id;
      group.config.producer = entry.producer;
      group.config.layer = entry.layer;
      group.config.scheme = entry.scheme;
      group.config.targets = entry.targets;
    }
    group.entries.push_back(&entry);
  }

  for (auto& [id, group] : groups) {
    ConfigReport& config = group.config;
    for (const std::string& metric : kMetricKeys) {
      SolveMatrix matrix;
      matrix.config_id = id;
      matrix.layer = config.layer;
      std::map<std::string, std::size_t> row_of;
      for (const LedgerEntry* entry : group.entries) {
        auto it = row_of.find(entry->bug_id);
        if (it == row_of.end()) {
          it = row_of.emplace(entry->bug_id, matrix.bug_ids.size()).first;
          matrix.bug_ids.push_back(entry->bug_id);
          matrix.rows.emplace_back();
        }
        matrix.rows[it->second].push_back(metric_solved(*entry, metric));
      }
      MetricReport report;
      report.layer_report = aggregate_layer(matrix);
      report.bug_ids = matrix.bug_ids;
      report.bug_solved = bug_level_solved(matrix);
      config.total_bugs = report.layer_report.total_bugs;
      config.metrics[metric] = std::move(report);
    }
    bundle.configs.push_back(std::move(config));
  }

  std::sort(bundle.configs.begin(), bundle.configs.end(),
            [](const ConfigReport& a, const ConfigReport& b) {
              return std::make_tuple(a.producer, layer_rank(a.layer), a.scheme,
                                     a.targets) <
                     std::make_tuple(b.producer, layer_rank(b.layer), b.scheme,
                                     b.targets);
            });

  // Compare every layered configuration against the same adapter's
  // original-bug baseline.
  for (const ConfigReport& base : bundle.configs) {
    if (base.layer != LayerTag::kRemember || base.scheme != "original") continue;
    for (const ConfigReport& other : bundle.configs) {
      if (other.producer != base.producer || other.config_id == base.config_id) {
        continue;
      }
      for (const std::string& metric : kMetricKeys) {
        const MetricReport& base_metric = base.metrics.at(metric);
        const MetricReport& other_metric = other.metrics.at(metric);

        std::map<std::string, bool> base_solved;
        for (std::size_t i = 0; i < base_metric.bug_ids.size(); ++i) {
          base_solved[base_metric.bug_ids[i]] = base_metric.bug_solved[i];
        }
        std::vector<bool> paired_base;
        std::vector<bool> paired_other;
        for (std::size_t i = 0; i < other_metric.bug_ids.size(); ++i) {
          const auto it = base_solved.find(other_metric.bug_ids[i]);
          if (it == base_solved.end()) continue;
          paired_base.push_back(it->second);
          paired_other.push_back(other_metric.bug_solved[i]);
        }

        DeltaReport delta;
        delta.producer = base.producer;
        delta.base_config = base.config_id;
        delta.other_config = other.config_id;
        delta.metric = metric;
        delta.base_percent = base_metric.layer_report.percent;
        delta.other_percent = other_metric.layer_report.percent;
        delta.delta = cross_layer_delta(delta.base_percent, delta.other_percent);
        delta.test = mcnemar_paired(paired_base, paired_other);
        delta.significant = delta.test.p_value < request.alpha;
        delta.paired_bugs = static_cast<int>(paired_base.size());
        bundle.deltas.push_back(std::move(delta));
      }
    }
  }
  return bundle;
}

namespace {

std::string render_markdown(const ReportBundle& bundle) {
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  for (const RunData& run : bundle.runs) {
    out << "- run `" << run.run_id << "` (adapter `" << run.adapter << "`), corpus `"
        << run.corpus_name << "` digest `" << run.corpus_digest << "`\n";
  }
  out << "- McNemar significance level: alpha = " << format_p(bundle.alpha)
      << "; starred deltas are significant\n\n";

  out << "## Results by configuration\n\n";
  out << "| config | layer | bugs | %PP | %SYE | %EM |\n";
  out << "|---|---|---:|---:|---:|---:|\n";
  for (const ConfigReport& config : bundle.configs) {
    out << "| " << config.config_id << " | " << to_string(config.layer) << " | "
        << config.total_bugs;
    for (const std::string& metric : kMetricKeys) {
      out << " | " << format_percent(config.metrics.at(metric).layer_report.percent)
          << "%";
    }
    out << " |\n";
  }

  out << "\n## FIX class distribution (plausible patches)\n\n";
  out << "| config | FIX_0 | FIX_1 | FIX_+ | FIX_A |\n";
  out << "|---|---:|---:|---:|---:|\n";
  for (const ConfigReport& config : bundle.configs) {
    const LayerReport& pp = config.metrics.at("pp").layer_report;
    out << "| " << config.config_id;
    for (FixClass cls : kAllClasses) {
      out << " | " << class_count(pp, cls);
    }
    out << " |\n";
  }

  out << "\n## Deltas against the original bugs\n\n";
  if (bundle.deltas.empty()) {
    out << "No layered configurations to compare.\n";
  } else {
    out << "| producer | config | metric | base | layered | delta | b/c | p |\n";
    out << "|---|---|---|---:|---:|---:|---|---:|\n";
    for (const DeltaReport& delta : bundle.deltas) {
      std::string label = delta.metric;
      for (std::size_t i = 0; i < 3; ++i) {
        if (delta.metric == kMetricKeys[i]) label = kMetricLabels[i];
      }
      out << "| " << delta.producer << " | " << delta.other_config << " | " << label
          << " | " << format_percent(delta.base_percent) << "% | "
          << format_percent(delta.other_percent) << "% | ";
      if (delta.delta.undefined) {
        out << "n/a";
      } else {
        out << format_percent(delta.delta.relative_change_percent) << "%";
        if (delta.significant) out << " *";
      }
      out << " | " << delta.test.b << "/" << delta.test.c << " | "
          << format_p(delta.test.p_value) << " |\n";
    }
  }
  return out.str();
}

std::string render_csv(const ReportBundle& bundle) {
  std::ostringstream out;
  out << "kind,config,producer,layer,scheme,targets,metric,solved,total,percent,"
         "fix_0,fix_1,fix_plus,fix_all\n";
  for (const ConfigReport& config : bundle.configs) {
    for (const std::string& metric : kMetricKeys) {
      const LayerReport& report = config.metrics.at(metric).layer_report;
      out << "layer," << config.config_id << "," << config.producer << ","
          << to_string(config.layer) << "," << config.scheme << "," << config.targets
          << "," << metric << "," << report.solved_bugs << "," << report.total_bugs
          << "," << format_percent(report.percent);
      for (FixClass cls : kAllClasses) {
        out << "," << class_count(report, cls);
      }
      out << "\n";
    }
  }
  out << "\nkind,producer,base_config,other_config,metric,base_percent,other_percent,"
         "delta_percent,undefined,b,c,method,p_value,significant\n";
  for (const DeltaReport& delta : bundle.deltas) {
    out << "delta," << delta.producer << "," << delta.base_config << ","
        << delta.other_config << "," << delta.metric << ","
        << format_percent(delta.base_percent) << ","
        << format_percent(delta.other_percent) << ",";
    if (delta.delta.undefined) {
      out << ",yes";
    } else {
      out << format_percent(delta.delta.relative_change_percent) << ",no";
    }
    out << "," << delta.test.b << "," << delta.test.c << "," << delta.test.method << ","
        << format_p(delta.test.p_value) << "," << (delta.significant ? "yes" : "no")
        << "\n";
  }
  return out.str();
}

std::string render_json(const ReportBundle& bundle) {
  json doc;
  doc["alpha"] = bundle.alpha;
  doc["runs"] = json::array();
  for (const RunData& run : bundle.runs) {
    json entry;
    entry["run_id"] = run.run_id;
    entry["adapter"] = run.adapter;
    entry["corpus_name"] = run.corpus_name;
    entry["corpus_digest"] = run.corpus_digest;
    doc["runs"].push_back(entry);
  }
  doc["configs"] = json::array();
  for (const ConfigReport& config : bundle.configs) {
    json entry;
    entry["config_id"] = config.config_id;
    entry["producer"] = config.producer;
    entry["layer"] = to_string(config.layer);
    entry["scheme"] = config.scheme;
    entry["targets"] = config.targets;
    entry["total_bugs"] = config.total_bugs;
    for (const std::string& metric : kMetricKeys) {
      const LayerReport& report = config.metrics.at(metric).layer_report;
      json cell;
      cell["solved_bugs"] = report.solved_bugs;
      cell["total_bugs"] = report.total_bugs;
      cell["percent"] = report.percent;
      cell["percent_text"] = format_percent(report.percent);
      json distribution;
      for (FixClass cls : kAllClasses) {
        distribution[to_string(cls)] = class_count(report, cls);
      }
      cell["fix_distribution"] = distribution;
      entry["metrics"][metric] = cell;
    }
    doc["configs"].push_back(entry);
  }
  doc["deltas"] = json::array();
  for (const DeltaReport& delta : bundle.deltas) {
    json entry;
    entry["producer"] = delta.producer;
    entry["base_config"] = delta.base_config;
    entry["other_config"] = delta.other_config;
    entry["metric"] = delta.metric;
    entry["base_percent"] = delta.base_percent;
    entry["other_percent"] = delta.other_percent;
    entry["undefined"] = delta.delta.undefined;
    if (!delta.delta.undefined) {
      entry["delta_percent"] = delta.delta.relative_change_percent;
      entry["delta_text"] = format_percent(delta.delta.relative_change_percent);
    }
    entry["paired_bugs"] = delta.paired_bugs;
    entry["mcnemar"] = {{"b", delta.test.b},
                        {"c", delta.test.c},
                        {"method", delta.test.method},
                        {"p_value", delta.test.p_value}};
    entry["significant"] = delta.significant;
    doc["deltas"].push_back(entry);
  }
  return doc.dump(2) + "\n";
}

}  // namespace

ReportFiles emit_report(const ReportRequest& request, const fs::path& out_dir,
                        const std::vector<ReportFormat>& formats) {
  const ReportBundle bundle = build_report(request);
  fs::create_directories(out_dir);
  ReportFiles files;
  for (ReportFormat format : formats) {
    switch (format) {
      case ReportFormat::kMarkdown:
        files.markdown = out_dir / "report.md";
        write_file(files.markdown, render_markdown(bundle));
        break;
      case ReportFormat::kCsv:
        files.csv = out_dir / "report.csv";
        write_file(files.csv, render_csv(bundle));
        break;
      case ReportFormat::kJson:
        files.json = out_dir / "report.json";
        write_file(files.json, render_json(bundle));
        break;
    }
  }
  return files;
}

}  // namespace layerbench
