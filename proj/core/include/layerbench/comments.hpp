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

#include <string>

#include "layerbench/lexer.hpp"

namespace layerbench {

// remove_all strips every comment; add_textual puts a fixed note line before
// each statement-opening line; add_code_comments puts a commented-out copy of
// each code line before it. All three leave the live token stream unchanged.
enum class CommentMode { kRemoveAll, kAddTextual, kAddCodeComments };

CommentMode comment_mode_from_string(const std::string& name);  // Error(E_BAD_ARGS)
std::string to_string(CommentMode mode);

// Deterministic rewrite of `text` under `mode`. Lines that start inside a
// block comment or continue a previous line (trailing backslash) never
// receive an insertion, so continued macros and strings stay intact.
std::string perturb_comments(const std::string& text, CommentMode mode,
                             const SubjectProfile& profile);

}  // namespace layerbench
