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

#include "layerbench/exec.hpp"

#include <string>

#include "doctest.h"
#include "test_support.hpp"

using namespace layerbench;

TEST_CASE("execute captures stdout and stderr separately") {
  ExecResult r = execute_build_test({"echo out; echo err 1>&2", "", 10.0});
  CHECK(r.ok());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text == "out\n");
  CHECK(r.stderr_text == "err\n");
  CHECK_FALSE(r.timed_out);
}

TEST_CASE("execute reports the exit code") {
  ExecResult r = execute_build_test({"exit 3", "", 10.0});
  CHECK_FALSE(r.ok());
  CHECK(r.exit_code == 3);
}

TEST_CASE("execute runs in the requested workdir") {
  testing::TempDir tmp;
  ExecResult r = execute_build_test({"pwd", tmp.path(), 10.0});
  CHECK(r.ok());
  CHECK(r.stdout_text.find(tmp.path().filename().string()) != std::string::npos);
}

TEST_CASE("execute kills the whole group on timeout") {
  ExecResult r = execute_build_test({"sleep 30", "", 0.3});
  CHECK(r.timed_out);
  CHECK_FALSE(r.ok());
  CHECK(r.duration_s < 5.0);
}

TEST_CASE("execute truncates oversized output with a marker") {
  ExecRequest request{"i=0; while [ $i -lt 2000 ]; do echo 0123456789; i=$((i+1)); done",
                      "", 20.0};
  request.max_output_bytes = 1024;
  ExecResult r = execute_build_test(request);
  CHECK(r.ok());
  CHECK(r.truncated);
  CHECK(r.stdout_text.size() <= 1024 + std::string(kTruncationMarker).size());
  CHECK(r.stdout_text.find(kTruncationMarker) != std::string::npos);
}

TEST_CASE("missing command is an ordinary failure") {
  ExecResult r = execute_build_test({"definitely-not-a-real-binary-xyz", "", 10.0});
  CHECK_FALSE(r.ok());
  CHECK_FALSE(r.spawn_failed);
  CHECK(r.exit_code == 127);
}
