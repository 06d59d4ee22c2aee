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

#include <stdexcept>
#include <string>
#include <utility>

namespace layerbench {

// Machine-parsable error classes. The CLI prints exactly one line of the
// form "E_CODE: detail" on stderr and exits nonzero, so scripts can branch
// on the code without scraping prose.
inline constexpr const char* kErrBadArgs = "E_BAD_ARGS";
inline constexpr const char* kErrConfig = "E_CONFIG";
inline constexpr const char* kErrIo = "E_IO";
inline constexpr const char* kErrProfile = "E_PROFILE";
inline constexpr const char* kErrLex = "E_LEX";
inline constexpr const char* kErrFunctionNotFound = "E_FUNCTION_NOT_FOUND";
inline constexpr const char* kErrManifest = "E_MANIFEST";
inline constexpr const char* kErrDuplicateId = "E_DUPLICATE_ID";
inline constexpr const char* kErrDanglingRef = "E_DANGLING_REF";
inline constexpr const char* kErrWorkdirNotEmpty = "E_WORKDIR_NOT_EMPTY";
inline constexpr const char* kErrCorpusInvalid = "E_CORPUS_INVALID";
inline constexpr const char* kErrLintFailed = "E_LINT_FAILED";
inline constexpr const char* kErrRenameOverlap = "E_RENAME_OVERLAP";
inline constexpr const char* kErrRenameIncomplete = "E_RENAME_INCOMPLETE";
inline constexpr const char* kErrHazard = "E_HAZARD";
inline constexpr const char* kErrTemplateUnknown = "E_TEMPLATE_UNKNOWN";
inline constexpr const char* kErrSlotMissing = "E_SLOT_MISSING";
inline constexpr const char* kErrReplayMiss = "E_REPLAY_MISS";
inline constexpr const char* kErrLlmTransport = "E_LLM_TRANSPORT";
inline constexpr const char* kErrSearchExport = "E_SEARCH_EXPORT";
inline constexpr const char* kErrRunNotFound = "E_RUN_NOT_FOUND";
inline constexpr const char* kErrLedgerIncomplete = "E_LEDGER_INCOMPLETE";
inline constexpr const char* kErrLedgerCorrupt = "E_LEDGER_CORRUPT";
inline constexpr const char* kErrStats = "E_STATS";
inline constexpr const char* kErrInternal = "E_INTERNAL";

// Domain error: a stable class code plus a human-readable detail line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace layerbench
