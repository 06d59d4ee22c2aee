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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerbench/callsite.hpp"
#include "layerbench/lexer.hpp"
#include "layerbench/scope.hpp"

namespace layerbench {

// Difficulty layers a bug instance can belong to. `remember` holds the
// originals; the other three hold generated material: renamed/comment-
// perturbed copies (`apply`), synthesized sibling bugs (`understand`), and
// bugs injected into unrelated host projects (`analyze`).
enum class LayerTag { kRemember, kUnderstand, kApply, kAnalyze };

enum class Provenance { kOriginal, kSynthetic, kInjected, kPerturbed };

std::string to_string(LayerTag tag);
std::string to_string(Provenance provenance);
LayerTag layer_from_string(const std::string& name);          // Error(E_MANIFEST)
Provenance provenance_from_string(const std::string& name);   // Error(E_MANIFEST)

// A function definition within one checkout: path, name, byte span of the
// full definition, and its text.
struct SourceRegion {
  std::filesystem::path file;
  std::string function_name;
  Span span;
  std::string text;
};

// One evaluable bug: a directory with buggy/, fixed/ and tests/ subtrees
// plus build and test commands. A checkout is the union of buggy/ (or
// fixed/) at the root and tests/ mounted at <root>/tests.
struct BugInstance {
  std::string id;  // "Project-3" for originals, "Project-3-v2" for variants
  std::string project;
  LayerTag layer = LayerTag::kRemember;
  Provenance provenance = Provenance::kOriginal;
  std::filesystem::path buggy_file;  // relative to the checkout root
  std::string function_name;
  std::string build_cmd;
  std::string test_cmd;
  std::vector<std::string> trigger_tests;
  SourceRegion buggy_function;
  SourceRegion fixed_function;
  std::filesystem::path root;  // directory holding buggy/, fixed/, tests/
};

// How a variant was derived from its parent.
struct TransformDescriptor {
  std::string scheme;   // hash | rephrase | comments | root_cause | behavior | inject
  std::string targets;  // vars | funcs | both, or the comment mode, or ""
  std::map<std::string, std::string> rename_map;
  std::int64_t clock_stamp = 0;
  Hazards hazards;
};

struct Variant {
  BugInstance instance;
  TransformDescriptor transform;
};

struct VariantSet {
  std::string parent_id;
  LayerTag layer = LayerTag::kApply;
  std::vector<Variant> variants;
};

class Benchmark {
 public:
  std::string name;
  std::string subject_language;
  std::filesystem::path root;
  std::string manifest_text;  // raw manifest.json bytes, for digesting
  SubjectProfile profile;

  std::vector<BugInstance> bugs;  // manifest order
  // Keyed by (layer, parent id); variants sorted by index k.
  std::map<std::pair<LayerTag, std::string>, VariantSet> variant_sets;

  const BugInstance* find_bug(const std::string& id) const;
  const BugInstance* find_instance(const std::string& id) const;  // bugs + variants
  const VariantSet* find_variant_set(LayerTag layer, const std::string& parent_id) const;

  // Instances evaluated at `layer`: the originals for kRemember, otherwise
  // every variant registered under that layer, in (parent, k) order.
  std::vector<const BugInstance*> instances_of_layer(LayerTag layer) const;

  // Next free variant index for `parent_id`. Indices count across layers so
  // variant ids stay globally unique.
  int next_variant_index(const std::string& parent_id) const;

  std::string corpus_digest() const;  // sha256 of the manifest bytes
};

// Loads manifest.json under `root`, resolves every bug's buggy and fixed
// function, and picks up previously registered variants from variants/.
// Errors: E_MANIFEST (missing/malformed manifest), E_DUPLICATE_ID,
// E_DANGLING_REF (missing directory, file or function, named by id).
Benchmark load_manifest(const std::filesystem::path& root);

// Persists `set` under <root>/variants/<layer>/<parent>/<k>/ and adds it to
// the in-memory benchmark. Variant ids are assigned here ("<parent>-v<k>").
// Each variant's instance.root must point at a staged {buggy,fixed,tests}
// tree, which is copied into the corpus. Re-registering the same apply
// scheme/targets combination for a parent is an error.
void register_variant_set(Benchmark& benchmark, VariantSet set);

// Copies the buggy (or fixed) checkout of `bug` into `dest`:
// dest/<files from buggy|fixed>, dest/tests/<files from tests>.
void stage_checkout(const BugInstance& bug, bool fixed,
                    const std::filesystem::path& dest);

struct TaskBundle {
  std::string instance_id;
  std::filesystem::path workdir;
  std::filesystem::path project_dir;      // workdir/project
  std::filesystem::path metadata_path;    // workdir/metadata.json
  std::filesystem::path failing_output_path;  // workdir/failing_output.txt
};

struct MaterializeOptions {
  double timeout_s = 120.0;
};

// Stages the buggy checkout into <workdir>/project, runs build and tests,
// and records the failing output. Errors: E_WORKDIR_NOT_EMPTY if workdir
// has entries, E_CORPUS_INVALID if the buggy checkout builds and then
// passes its tests (or fails to build at all).
TaskBundle materialize_task_bundle(const BugInstance& bug,
                                   const std::filesystem::path& workdir,
                                   const MaterializeOptions& options = {});

}  // namespace layerbench
