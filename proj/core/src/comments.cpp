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

#include "layerbench/comments.hpp"

#include <vector>

#include "layerbench/error.hpp"

namespace layerbench {
namespace {

constexpr char kTextualNote[] =
    "note: the following statement is part of the original logic";

// Character-level scan state. Tracks enough syntax to know whether a given
// byte is live code, so comment edits never touch strings and insertions
// never split a continued line.
enum class ScanState { kCode, kLineComment, kBlockComment, kString, kChar };

struct LineInfo {
  size_t begin = 0;
  size_t end = 0;               // exclusive, excludes the newline
  bool starts_in_code = false;
  bool prev_continues = false;  // previous line ended with a backslash
};

// Emits `text` with comments removed when `out` is non-null, and records
// per-line state either way. A block comment is replaced by one space so
// adjacent tokens cannot merge; newlines inside it survive; a line comment
// is dropped up to its newline.
std::vector<LineInfo> scan(const std::string& text, const SubjectProfile& profile,
                           std::string* out) {
  std::vector<LineInfo> lines;
  ScanState state = ScanState::kCode;
  char string_delim = 0;
  bool prev_backslash_newline = false;

  LineInfo current;
  current.begin = 0;
  current.starts_in_code = true;

  auto close_line = [&](size_t end_pos, bool ends_with_backslash) {
    current.end = end_pos;
    lines.push_back(current);
    current = LineInfo{};
    current.begin = end_pos + 1;
    current.starts_in_code = state == ScanState::kCode;
    current.prev_continues = ends_with_backslash;
  };

  size_t i = 0;
  const size_t n = text.size();
  auto starts_with = [&](size_t pos, const std::string& marker) {
    return !marker.empty() && text.compare(pos, marker.size(), marker) == 0;
  };

  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      if (state == ScanState::kLineComment) state = ScanState::kCode;
      if (out != nullptr) *out += '\n';
      close_line(i, prev_backslash_newline);
      prev_backslash_newline = false;
      ++i;
      continue;
    }
    prev_backslash_newline = false;

    switch (state) {
      case ScanState::kCode:
        if (starts_with(i, profile.line_comment)) {
          state = ScanState::kLineComment;
          i += profile.line_comment.size();
          continue;
        }
        if (starts_with(i, profile.block_comment_open)) {
          state = ScanState::kBlockComment;
          if (out != nullptr) *out += ' ';
          i += profile.block_comment_open.size();
          continue;
        }
        if (profile.string_delims.find(c) != std::string::npos) {
          state = ScanState::kString;
          string_delim = c;
        } else if (c == profile.char_delim) {
          state = ScanState::kChar;
        } else if (c == '\\' && i + 1 < n && text[i + 1] == '\n') {
          prev_backslash_newline = true;
        }
        if (out != nullptr) *out += c;
        ++i;
        break;

      case ScanState::kLineComment:
        ++i;
        break;

      case ScanState::kBlockComment:
        if (starts_with(i, profile.block_comment_close)) {
          state = ScanState::kCode;
          i += profile.block_comment_close.size();
        } else {
          ++i;
        }
        break;

      case ScanState::kString:
      case ScanState::kChar: {
        const char closer = state == ScanState::kString ? string_delim : profile.char_delim;
        if (c == '\\' && i + 1 < n) {
          if (out != nullptr) out->append(text, i, 2);
          i += 2;
          if (text[i - 1] == '\n') {
            close_line(i - 1, true);
          }
          continue;
        }
        if (c == closer) state = ScanState::kCode;
        if (out != nullptr) *out += c;
        ++i;
        break;
      }
    }
  }
  current.end = n;
  lines.push_back(current);
  return lines;
}

std::string indentation_of(const std::string& line) {
  size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.substr(0, i);
}

// True for a line whose visible content begins live code (not blank, not a
// pure comment line, not the continuation of a previous line).
bool opens_statement(const LineInfo& info, const std::string& line,
                     const SubjectProfile& profile) {
  if (!info.starts_in_code || info.prev_continues) return false;
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) return false;
  if (line.compare(first, profile.line_comment.size(), profile.line_comment) == 0) return false;
  if (line.compare(first, profile.block_comment_open.size(), profile.block_comment_open) == 0) {
    return false;
  }
  return true;
}

std::string insert_comment_lines(const std::string& text, const SubjectProfile& profile,
                                 bool code_copies) {
  const std::vector<LineInfo> lines = scan(text, profile, nullptr);

  std::string out;
  out.reserve(text.size() * 2);
  for (const auto& info : lines) {
    if (info.begin >= text.size() && info.begin == info.end) {
      break;  // empty sentinel after a trailing newline
    }
    const std::string line = text.substr(info.begin, info.end - info.begin);
    if (opens_statement(info, line, profile)) {
      const std::string indent = indentation_of(line);
      std::string body;
      if (code_copies) {
        body = line.substr(indent.size());
        for (char& c : body) {
          if (c == '\r') c = ' ';
        }
        // A copy ending in a backslash would splice the next line into the
        // comment under real compilers; trim it.
        while (!body.empty() &&
               (body.back() == '\\' || body.back() == ' ' || body.back() == '\t')) {
          body.pop_back();
        }
      } else {
        body = kTextualNote;
      }
      out += indent;
      out += profile.line_comment;
      out += ' ';
      out += body;
      out += '\n';
    }
    out += line;
    if (info.end < text.size()) out += '\n';
  }
  return out;
}

}  // namespace

CommentMode comment_mode_from_string(const std::string& name) {
  if (name == "remove_all") return CommentMode::kRemoveAll;
  if (name == "add_textual") return CommentMode::kAddTextual;
  if (name == "add_code_comments") return CommentMode::kAddCodeComments;
  throw Error(kErrBadArgs, "unknown comment mode: " + name);
}

std::string to_string(CommentMode mode) {
  switch (mode) {
    case CommentMode::kRemoveAll: return "remove_all";
    case CommentMode::kAddTextual: return "add_textual";
    case CommentMode::kAddCodeComments: return "add_code_comments";
  }
  throw Error(kErrInternal, "bad comment mode value");
}

std::string perturb_comments(const std::string& text, CommentMode mode,
                             const SubjectProfile& profile) {
  switch (mode) {
    case CommentMode::kRemoveAll: {
      std::string out;
      out.reserve(text.size());
      scan(text, profile, &out);
      return out;
    }
    case CommentMode::kAddTextual:
      return insert_comment_lines(text, profile, /*code_copies=*/false);
    case CommentMode::kAddCodeComments:
      return insert_comment_lines(text, profile, /*code_copies=*/true);
  }
  throw Error(kErrInternal, "bad comment mode value");
}

}  // namespace layerbench
