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
#include <string>
#include <vector>

namespace layerbench {

// Reads a whole file; throws Error(E_IO) if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes `content`, creating parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

// Recursively copies `from` into `to` (directories merged, files overwritten).
void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to);

// Regular files under `root`, as relative paths in sorted order. The sort
// keeps every directory walk deterministic regardless of filesystem order.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& root);

// True if `dir` does not exist or contains no entries.
bool dir_missing_or_empty(const std::filesystem::path& dir);

}  // namespace layerbench
