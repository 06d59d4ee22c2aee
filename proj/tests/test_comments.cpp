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

#include <string>

#include <doctest.h>

#include "layerbench/comments.hpp"
#include "layerbench/error.hpp"
#include "test_support.hpp"

namespace layerbench {
namespace {

const SubjectProfile& profile() {
  static const SubjectProfile p = default_cfamily_profile();
  return p;
}

bool same_token_stream(const std::string& a, const std::string& b) {
  return tokenize(a, profile()) == tokenize(b, profile());
}

size_t count_lines(const std::string& text) {
  size_t lines = 0;
  for (char c : text) lines += c == '\n';
  if (!text.empty() && text.back() != '\n') ++lines;
  return lines;
}

const char kSample[] =
    "// top note\n"
    "int scale(int value) {\n"
    "  int factor = 2; // inline note\n"
    "  /* block\n"
    "     note */\n"
    "  const char* label = \"keep // this\"; \n"
    "  return value * factor; /* tail */\n"
    "}\n";

TEST_CASE("remove_all strips every comment but keeps the token stream") {
  const std::string out = perturb_comments(kSample, CommentMode::kRemoveAll, profile());
  CHECK(out.find("note") == std::string::npos);
  CHECK(out.find("/*") == std::string::npos);
  CHECK(out.find("tail") == std::string::npos);
  // Comment markers inside string literals survive.
  CHECK(out.find("\"keep // this\"") != std::string::npos);
  CHECK(same_token_stream(kSample, out));
}

TEST_CASE("remove_all keeps adjacent tokens separated") {
  const std::string glued = "int a/*x*/= 1;\nreturn a//tail\n;\n";
  const std::string out = perturb_comments(glued, CommentMode::kRemoveAll, profile());
  CHECK(same_token_stream(glued, out));
  CHECK(out.find("x") == std::string::npos);
}

TEST_CASE("add_textual puts one fixed note before each statement-opening line") {
  const std::string out = perturb_comments(kSample, CommentMode::kAddTextual, profile());
  CHECK(same_token_stream(kSample, out));

  size_t notes = 0;
  for (size_t pos = out.find("original logic"); pos != std::string::npos;
       pos = out.find("original logic", pos + 1)) {
    ++notes;
  }
  // Statement-opening lines: signature, factor decl, label decl, return,
  // closing brace. The pure-comment lines and the block-comment interior
  // take nothing.
  CHECK(notes == 5);
  // Idempotent input positions: running on the output leaves tokens alone.
  CHECK(same_token_stream(kSample, perturb_comments(out, CommentMode::kAddTextual, profile())));
}

TEST_CASE("add_code_comments doubles the line count of a plain function") {
  std::string body = "int total(int n) {\n";
  for (int i = 0; i < 8; ++i) {
    body += "  n = n + " + std::to_string(i) + ";\n";
  }
  body += "}\n";
  REQUIRE(count_lines(body) == 10);

  const std::string out = perturb_comments(body, CommentMode::kAddCodeComments, profile());
  CHECK(same_token_stream(body, out));
  const size_t out_lines = count_lines(out);
  CHECK(out_lines >= 19);
  CHECK(out_lines <= 21);
  // The copy precedes its original.
  CHECK(out.find("// n = n + 3;") < out.find("\n  n = n + 3;"));
}

TEST_CASE("add_textual then remove_all matches remove_all of the original") {
  const std::string added = perturb_comments(kSample, CommentMode::kAddTextual, profile());
  const std::string cleaned = perturb_comments(added, CommentMode::kRemoveAll, profile());
  const std::string direct = perturb_comments(kSample, CommentMode::kRemoveAll, profile());
  CHECK(same_token_stream(cleaned, direct));
  CHECK(cleaned.find("original logic") == std::string::npos);
}

TEST_CASE("insertions never split continued lines") {
  const std::string macro =
      "#define TWICE(x) \\\n"
      "  ((x) + (x))\n"
      "int use(int v) {\n"
      "  return TWICE(v);\n"
      "}\n";
  for (CommentMode mode : {CommentMode::kAddTextual, CommentMode::kAddCodeComments}) {
    const std::string out = perturb_comments(macro, mode, profile());
    CHECK(same_token_stream(macro, out));
    // The continuation body still directly follows its backslash.
    const auto pos = out.find("\\\n");
    REQUIRE(pos != std::string::npos);
    CHECK(out.substr(pos + 2, 2) == "  ");
    // No inserted comment ends with a continuation backslash.
    CHECK(out.find("\\\n  ((x)") != std::string::npos);
  }
  const std::string copies = perturb_comments(macro, CommentMode::kAddCodeComments, profile());
  CHECK(copies.find("// #define TWICE(x)\n") != std::string::npos);
}

TEST_CASE("token stream is preserved across modes") {
  for (CommentMode mode :
       {CommentMode::kRemoveAll, CommentMode::kAddTextual, CommentMode::kAddCodeComments}) {
    const std::string out = perturb_comments(kSample, mode, profile());
    CHECK(same_token_stream(kSample, out));
  }
}

TEST_CASE("comment mode names round-trip") {
  CHECK(comment_mode_from_string("remove_all") == CommentMode::kRemoveAll);
  CHECK(comment_mode_from_string("add_textual") == CommentMode::kAddTextual);
  CHECK(comment_mode_from_string("add_code_comments") == CommentMode::kAddCodeComments);
  CHECK(to_string(CommentMode::kAddTextual) == "add_textual");
  CHECK_THROWS_AS(comment_mode_from_string("strip"), Error);
}

}  // namespace
}  // namespace layerbench
