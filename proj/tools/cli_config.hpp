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

#include <filesystem>
#include <map>
#include <string>

namespace layerbench {

// A flat key = value file with [section] headers, '#'/';' comments and
// optional double quotes around values. Every CLI flag has a same-named key
// (top level or under the subcommand's section); [adapter.<id>] sections
// define repair agents for `bench run`.
struct CliConfig {
  std::map<std::string, std::string> values;
  std::map<std::string, std::map<std::string, std::string>> sections;

  // Section value first, then the top-level key, then "".
  std::string lookup(const std::string& section, const std::string& key) const;
};

CliConfig parse_config_file(const std::filesystem::path& path);  // Error(E_CONFIG)

}  // namespace layerbench
