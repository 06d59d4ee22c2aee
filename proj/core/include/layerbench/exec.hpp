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

namespace layerbench {

inline constexpr const char* kTruncationMarker = "\n[output truncated]\n";

struct ExecRequest {
  std::string command;  // run via /bin/sh -c in `workdir`
  std::filesystem::path workdir;
  double timeout_s = 120.0;
  std::size_t max_output_bytes = 1 << 20;  // per stream
};

struct ExecResult {
  int exit_code = -1;  // 128+signal if killed, -1 if it never ran
  bool timed_out = false;
  bool spawn_failed = false;  // distinct outcome, not a crash
  std::string stdout_text;
  std::string stderr_text;
  bool truncated = false;
  double duration_s = 0.0;

  bool ok() const { return !timed_out && !spawn_failed && exit_code == 0; }
};

// Runs the command in its own process group, captures stdout and stderr up
// to the configured cap (a marker notes truncation), and kills the whole
// group on timeout.
ExecResult execute_build_test(const ExecRequest& request);

}  // namespace layerbench
