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
#include <string>
#include <vector>

#include "layerbench/corpus.hpp"

namespace layerbench {

class LlmGateway;

// One apply-layer variation: scheme "hash" or "rephrase" with targets
// "vars", "funcs" or "both"; or scheme "comments" with a comment mode as
// targets.
struct ApplyVariation {
  std::string scheme;
  std::string targets;
};

// The six renaming variations.
std::vector<ApplyVariation> default_apply_variations();

struct ApplyGenOptions {
  std::uint64_t clock_stamp = 0;  // required; pins hash names and file stamps
  std::vector<ApplyVariation> variations = default_apply_variations();
  int rephrase_rounds = 3;
  std::filesystem::path scratch_dir;  // empty: a fresh directory under /tmp
};

struct ApplyExclusion {
  std::string bug_id;
  std::string scheme;
  std::string targets;
  std::string reason;
};

struct ApplyGenReport {
  int registered = 0;
  int excluded = 0;
  std::vector<ApplyExclusion> exclusions;
  std::map<std::string, int> variants_per_bug;
};

// Generates apply-layer variants for every bug in the benchmark. Hazardous
// function renames and failed rephrase negotiations become exclusions in the
// report; per-bug failures never abort the run. Registered variants are
// byte-reproducible for a fixed clock_stamp.
ApplyGenReport generate_apply_layer(Benchmark& benchmark, const ApplyGenOptions& options,
                                    LlmGateway* gateway = nullptr);

}  // namespace layerbench
