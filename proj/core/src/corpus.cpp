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

#include "layerbench/corpus.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "layerbench/error.hpp"
#include "layerbench/exec.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/sha256.hpp"

namespace layerbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(LayerTag tag) {
  switch (tag) {
    case LayerTag::kRemember: return "remember";
    case LayerTag::kUnderstand: return "understand";
    case LayerTag::kApply: return "apply";
    case LayerTag::kAnalyze: return "analyze";
  }
  return "remember";
}

std::string to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kOriginal: return "original";
    case Provenance::kSynthetic: return "synthetic";
    case Provenance::kInjected: return "injected";
    case Provenance::kPerturbed: return "perturbed";
  }
  return "original";
}

LayerTag layer_from_string(const std::string& name) {
  if (name == "remember") return LayerTag::kRemember;
  if (name == "understand") return LayerTag::kUnderstand;
  if (name == "apply") return LayerTag::kApply;
  if (name == "analyze") return LayerTag::kAnalyze;
  throw Error(kErrManifest, "unknown layer '" + name + "'");
}

Provenance provenance_from_string(const std::string& name) {
  if (name == "original") return Provenance::kOriginal;
  if (name == "synthetic") return Provenance::kSynthetic;
  if (name == "injected") return Provenance::kInjected;
  if (name == "perturbed") return Provenance::kPerturbed;
  throw Error(kErrManifest, "unknown provenance '" + name + "'");
}

namespace {

Provenance provenance_from_scheme(const std::string& scheme) {
  if (scheme == "hash" || scheme == "rephrase" || scheme == "comments") {
    return Provenance::kPerturbed;
  }
  if (scheme == "root_cause" || scheme == "behavior") return Provenance::kSynthetic;
  if (scheme == "inject") return Provenance::kInjected;
  return Provenance::kOriginal;
}

std::string get_string(const json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key) || !doc.at(key).is_string()) {
    throw Error(kErrManifest, where + ": missing string field '" + key + "'");
  }
  return doc.at(key).get<std::string>();
}

// Shared shape of a manifest bug entry and a variant's instance.json.
BugInstance parse_instance(const json& doc, const std::string& where) {
  BugInstance bug;
  bug.id = get_string(doc, "id", where);
  bug.project = get_string(doc, "project", where);
  bug.buggy_file = get_string(doc, "buggy_file", where);
  bug.function_name = get_string(doc, "function_name", where);
  bug.build_cmd = get_string(doc, "build_cmd", where);
  bug.test_cmd = get_string(doc, "test_cmd", where);
  bug.layer = layer_from_string(get_string(doc, "layer", where));
  if (!doc.contains("trigger_tests") || !doc.at("trigger_tests").is_array() ||
      doc.at("trigger_tests").empty()) {
    throw Error(kErrManifest, where + ": trigger_tests must be a non-empty array");
  }
  for (const auto& t : doc.at("trigger_tests")) {
    bug.trigger_tests.push_back(t.get<std::string>());
  }
  if (doc.contains("provenance")) {
    bug.provenance = provenance_from_string(doc.at("provenance").get<std::string>());
  }
  return bug;
}

json instance_to_json(const BugInstance& bug) {
  json doc;
  doc["id"] = bug.id;
  doc["project"] = bug.project;
  doc["buggy_file"] = bug.buggy_file.generic_string();
  doc["function_name"] = bug.function_name;
  doc["build_cmd"] = bug.build_cmd;
  doc["test_cmd"] = bug.test_cmd;
  doc["trigger_tests"] = bug.trigger_tests;
  doc["layer"] = to_string(bug.layer);
  doc["provenance"] = to_string(bug.provenance);
  return doc;
}

TransformDescriptor transform_from_json(const json& doc, const std::string& where) {
  TransformDescriptor t;
  t.scheme = get_string(doc, "scheme", where);
  if (doc.contains("targets")) t.targets = doc.at("targets").get<std::string>();
  if (doc.contains("rename_map")) {
    for (const auto& [k, v] : doc.at("rename_map").items()) {
      t.rename_map[k] = v.get<std::string>();
    }
  }
  if (doc.contains("clock_stamp")) t.clock_stamp = doc.at("clock_stamp").get<std::int64_t>();
  if (doc.contains("hazards")) {
    const auto& h = doc.at("hazards");
    t.hazards.overloaded = h.value("overloaded", false);
    t.hazards.overridden_or_inherited = h.value("overridden_or_inherited", false);
    t.hazards.reflective_or_string_refs = h.value("reflective_or_string_refs", false);
  }
  return t;
}

json transform_to_json(const TransformDescriptor& t) {
  json doc;
  doc["scheme"] = t.scheme;
  doc["targets"] = t.targets;
  doc["rename_map"] = t.rename_map;
  doc["clock_stamp"] = t.clock_stamp;
  doc["hazards"] = {{"overloaded", t.hazards.overloaded},
                    {"overridden_or_inherited", t.hazards.overridden_or_inherited},
                    {"reflective_or_string_refs", t.hazards.reflective_or_string_refs}};
  return doc;
}

// Fills buggy_function / fixed_function from the bug's checkout trees.
void resolve_regions(BugInstance& bug, const SubjectProfile& profile) {
  for (bool fixed : {false, true}) {
    fs::path file = bug.root / (fixed ? "fixed" : "buggy") / bug.buggy_file;
    if (!fs::exists(file)) {
      throw Error(kErrDanglingRef, bug.id + ": missing " + file.string());
    }
    std::string text = read_file(file);
    auto tokens = tokenize(text, profile);
    auto defs = find_function_definitions(tokens, bug.function_name);
    if (defs.empty()) {
      throw Error(kErrDanglingRef, bug.id + ": no definition of '" + bug.function_name +
                                       "' in " + file.string());
    }
    SourceRegion region;
    region.file = bug.buggy_file;
    region.function_name = bug.function_name;
    region.span = defs.front().full_span;
    region.text = text.substr(region.span.begin, region.span.end - region.span.begin);
    (fixed ? bug.fixed_function : bug.buggy_function) = region;
  }
}

int variant_index_of(const std::string& id, const std::string& parent_id) {
  std::string prefix = parent_id + "-v";
  if (id.rfind(prefix, 0) != 0) return -1;
  try {
    return std::stoi(id.substr(prefix.size()));
  } catch (...) {
    return -1;
  }
}

void check_variant_set_size(const VariantSet& set) {
  if (set.layer == LayerTag::kUnderstand || set.layer == LayerTag::kAnalyze) {
    if (set.variants.empty() || set.variants.size() > 5) {
      throw Error(kErrManifest, "variant set for " + set.parent_id + " at layer " +
                                    to_string(set.layer) + " must hold 1..5 variants, has " +
                                    std::to_string(set.variants.size()));
    }
  }
}

}  // namespace

const BugInstance* Benchmark::find_bug(const std::string& id) const {
  for (const auto& bug : bugs) {
    if (bug.id == id) return &bug;
  }
  return nullptr;
}

const BugInstance* Benchmark::find_instance(const std::string& id) const {
  if (const BugInstance* bug = find_bug(id)) return bug;
  for (const auto& [key, set] : variant_sets) {
    for (const auto& variant : set.variants) {
      if (variant.instance.id == id) return &variant.instance;
    }
  }
  return nullptr;
}

const VariantSet* Benchmark::find_variant_set(LayerTag layer,
                                              const std::string& parent_id) const {
  auto it = variant_sets.find({layer, parent_id});
  return it == variant_sets.end() ? nullptr : &it->second;
}

std::vector<const BugInstance*> Benchmark::instances_of_layer(LayerTag layer) const {
  std::vector<const BugInstance*> out;
  if (layer == LayerTag::kRemember) {
    for (const auto& bug : bugs) {
      if (bug.layer == LayerTag::kRemember) out.push_back(&bug);
    }
    return out;
  }
  for (const auto& bug : bugs) {  // parent (manifest) order
    const VariantSet* set = find_variant_set(layer, bug.id);
    if (!set) continue;
    for (const auto& variant : set->variants) out.push_back(&variant.instance);
  }
  return out;
}

int Benchmark::next_variant_index(const std::string& parent_id) const {
  int max_k = 0;
  for (const auto& [key, set] : variant_sets) {
    if (key.second != parent_id) continue;
    for (const auto& variant : set.variants) {
      max_k = std::max(max_k, variant_index_of(variant.instance.id, parent_id));
    }
  }
  return max_k + 1;
}

std::string Benchmark::corpus_digest() const { return sha256_hex(manifest_text); }

Benchmark load_manifest(const fs::path& root) {
  fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw Error(kErrManifest, "no manifest.json under " + root.string());
  }
  Benchmark benchmark;
  benchmark.root = root;
  benchmark.manifest_text = read_file(manifest_path);

  json doc;
  try {
    doc = json::parse(benchmark.manifest_text);
  } catch (const json::exception& e) {
    throw Error(kErrManifest, manifest_path.string() + ": " + e.what());
  }
  benchmark.name = get_string(doc, "name", "manifest");
  benchmark.subject_language = get_string(doc, "subject_language", "manifest");

  fs::path profile_path = root / "profiles" / (benchmark.subject_language + ".json");
  benchmark.profile =
      fs::exists(profile_path) ? load_profile(profile_path) : default_cfamily_profile();

  if (!doc.contains("bugs") || !doc.at("bugs").is_array()) {
    throw Error(kErrManifest, "manifest has no 'bugs' array");
  }

  std::set<std::string> seen_ids;
  for (const auto& entry : doc.at("bugs")) {
    BugInstance bug = parse_instance(entry, "manifest");
    if (!seen_ids.insert(bug.id).second) {
      throw Error(kErrDuplicateId, "duplicate id '" + bug.id + "' in manifest");
    }
    bug.root = root / "bugs" / bug.id;
    if (!fs::exists(bug.root / "buggy") || !fs::exists(bug.root / "fixed")) {
      throw Error(kErrDanglingRef, bug.id + ": missing bug directory under " +
                                       bug.root.string());
    }
    resolve_regions(bug, benchmark.profile);
    benchmark.bugs.push_back(std::move(bug));
  }

  // Previously registered variants: variants/<layer>/<parent>/<k>/.
  fs::path variants_root = root / "variants";
  if (fs::exists(variants_root)) {
    for (const auto& layer_dir : fs::directory_iterator(variants_root)) {
      if (!layer_dir.is_directory()) continue;
      LayerTag layer = layer_from_string(layer_dir.path().filename().string());
      for (const auto& parent_dir : fs::directory_iterator(layer_dir.path())) {
        if (!parent_dir.is_directory()) continue;
        std::string parent_id = parent_dir.path().filename().string();
        if (!benchmark.find_bug(parent_id)) {
          throw Error(kErrDanglingRef, "variants reference unknown parent '" + parent_id + "'");
        }
        VariantSet set;
        set.parent_id = parent_id;
        set.layer = layer;
        std::vector<int> ks;
        for (const auto& k_dir : fs::directory_iterator(parent_dir.path())) {
          if (!k_dir.is_directory()) continue;
          ks.push_back(std::stoi(k_dir.path().filename().string()));
        }
        std::sort(ks.begin(), ks.end());
        for (int k : ks) {
          fs::path dir = parent_dir.path() / std::to_string(k);
          std::string where = dir.string();
          json instance_doc, transform_doc;
          try {
            instance_doc = json::parse(read_file(dir / "instance.json"));
            transform_doc = json::parse(read_file(dir / "transform.json"));
          } catch (const json::exception& e) {
            throw Error(kErrManifest, where + ": " + e.what());
          }
          Variant variant;
          variant.instance = parse_instance(instance_doc, where);
          variant.transform = transform_from_json(transform_doc, where);
          if (variant_index_of(variant.instance.id, parent_id) != k) {
            throw Error(kErrManifest, where + ": id '" + variant.instance.id +
                                          "' does not match parent and index");
          }
          if (!seen_ids.insert(variant.instance.id).second) {
            throw Error(kErrDuplicateId, "duplicate id '" + variant.instance.id + "'");
          }
          variant.instance.root = dir;
          variant.instance.layer = layer;
          resolve_regions(variant.instance, benchmark.profile);
          set.variants.push_back(std::move(variant));
        }
        check_variant_set_size(set);
        benchmark.variant_sets[{layer, parent_id}] = std::move(set);
      }
    }
  }
  return benchmark;
}

void register_variant_set(Benchmark& benchmark, VariantSet set) {
  const BugInstance* parent = benchmark.find_bug(set.parent_id);
  if (!parent) {
    throw Error(kErrDanglingRef, "unknown parent '" + set.parent_id + "'");
  }
  if (set.layer == LayerTag::kRemember) {
    throw Error(kErrManifest, "cannot register variants at the remember layer");
  }

  auto key = std::make_pair(set.layer, set.parent_id);
  VariantSet& target = benchmark.variant_sets
                           .emplace(key, VariantSet{set.parent_id, set.layer, {}})
                           .first->second;

  if (set.layer == LayerTag::kApply) {
    for (const auto& existing : target.variants) {
      for (const auto& incoming : set.variants) {
        if (existing.transform.scheme == incoming.transform.scheme &&
            existing.transform.targets == incoming.transform.targets) {
          throw Error(kErrDuplicateId,
                      set.parent_id + ": apply variant for scheme '" +
                          incoming.transform.scheme + "/" + incoming.transform.targets +
                          "' already registered");
        }
      }
    }
  }

  for (Variant& variant : set.variants) {
    int k = benchmark.next_variant_index(set.parent_id);
    std::string id = set.parent_id + "-v" + std::to_string(k);
    if (benchmark.find_instance(id)) {
      throw Error(kErrDuplicateId, "variant id '" + id + "' already exists");
    }
    fs::path dest = benchmark.root / "variants" / to_string(set.layer) /
                    set.parent_id / std::to_string(k);
    if (fs::exists(dest)) {
      throw Error(kErrDuplicateId, "variant directory already exists: " + dest.string());
    }

    fs::path staged = variant.instance.root;
    copy_tree(staged / "buggy", dest / "buggy");
    copy_tree(staged / "fixed", dest / "fixed");
    if (fs::exists(staged / "tests")) copy_tree(staged / "tests", dest / "tests");

    variant.instance.id = id;
    variant.instance.layer = set.layer;
    variant.instance.provenance = provenance_from_scheme(variant.transform.scheme);
    variant.instance.root = dest;
    resolve_regions(variant.instance, benchmark.profile);

    write_file(dest / "instance.json", instance_to_json(variant.instance).dump(2) + "\n");
    write_file(dest / "transform.json", transform_to_json(variant.transform).dump(2) + "\n");
    target.variants.push_back(std::move(variant));
  }
  check_variant_set_size(target);
}

void stage_checkout(const BugInstance& bug, bool fixed, const fs::path& dest) {
  copy_tree(bug.root / (fixed ? "fixed" : "buggy"), dest);
  if (fs::exists(bug.root / "tests")) {
    copy_tree(bug.root / "tests", dest / "tests");
  }
}

TaskBundle materialize_task_bundle(const BugInstance& bug, const fs::path& workdir,
                                   const MaterializeOptions& options) {
  if (!dir_missing_or_empty(workdir)) {
    throw Error(kErrWorkdirNotEmpty, workdir.string() + " is not empty");
  }
  TaskBundle bundle;
  bundle.instance_id = bug.id;
  bundle.workdir = workdir;
  bundle.project_dir = workdir / "project";
  bundle.metadata_path = workdir / "metadata.json";
  bundle.failing_output_path = workdir / "failing_output.txt";

  stage_checkout(bug, /*fixed=*/false, bundle.project_dir);

  ExecRequest build{bug.build_cmd, bundle.project_dir, options.timeout_s};
  ExecResult build_result = execute_build_test(build);
  if (!build_result.ok()) {
    throw Error(kErrCorpusInvalid, bug.id + ": buggy checkout does not build\n" +
                                       build_result.stdout_text + build_result.stderr_text);
  }
  ExecRequest test{bug.test_cmd, bundle.project_dir, options.timeout_s};
  ExecResult test_result = execute_build_test(test);
  if (test_result.ok()) {
    throw Error(kErrCorpusInvalid, bug.id + ": buggy checkout passes its tests");
  }
  write_file(bundle.failing_output_path,
             test_result.stdout_text + test_result.stderr_text);

  json metadata;
  metadata["id"] = bug.id;
  metadata["project"] = bug.project;
  metadata["layer"] = to_string(bug.layer);
  metadata["buggy_file"] = bug.buggy_file.generic_string();
  metadata["function_name"] = bug.function_name;
  metadata["function_span"] = {{"begin", bug.buggy_function.span.begin},
                               {"end", bug.buggy_function.span.end}};
  metadata["build_cmd"] = bug.build_cmd;
  metadata["test_cmd"] = bug.test_cmd;
  metadata["trigger_tests"] = bug.trigger_tests;
  write_file(bundle.metadata_path, metadata.dump(2) + "\n");
  return bundle;
}

}  // namespace layerbench
