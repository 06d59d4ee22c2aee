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

#include "cli_config.hpp"

#include <sstream>

#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"

namespace layerbench {
namespace {

std::string trim(const std::string& text) {
  const std::size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const std::size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::string unquote(const std::string& text) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    return text.substr(1, text.size() - 2);
  }
  return text;
}

}  // namespace

std::string CliConfig::lookup(const std::string& section, const std::string& key) const {
  const auto sit = sections.find(section);
  if (sit != sections.end()) {
    const auto kit = sit->second.find(key);
    if (kit != sit->second.end()) return kit->second;
  }
  const auto git = values.find(key);
  return git == values.end() ? "" : git->second;
}

CliConfig parse_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(kErrConfig, "config file not found: " + path.string());
  }
  CliConfig config;
  std::istringstream stream(read_file(path));
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw Error(kErrConfig, path.string() + ":" + std::to_string(line_no) +
                                    ": malformed section header");
      }
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(kErrConfig, path.string() + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = unquote(trim(text.substr(eq + 1)));
    if (key.empty()) {
      throw Error(kErrConfig,
                  path.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      config.values[key] = value;
    } else {
      config.sections[section][key] = value;
    }
  }
  return config;
}

}  // namespace layerbench
