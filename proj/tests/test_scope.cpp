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

#include "layerbench/scope.hpp"

#include <algorithm>

#include "doctest.h"
#include "layerbench/error.hpp"

using namespace layerbench;

namespace {

const SubjectProfile& profile() {
  static SubjectProfile p = default_cfamily_profile();
  return p;
}

const NamedOccurrences* find_name(const std::vector<NamedOccurrences>& entries,
                                  const std::string& name) {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("scope of a minimal function body") {
  // One local declared and used once, one free variable.
  std::string src = "int f() { int x = 0; return x + y; }";
  ScopeMap scope = resolve_function_scope(src, profile(), "f");
  CHECK(scope.params.empty());
  REQUIRE(scope.locals.size() == 1);
  CHECK(scope.locals[0].name == "x");
  CHECK(scope.locals[0].occurrences.size() == 2);
  CHECK(scope.free_names == std::set<std::string>{"y"});
}

TEST_CASE("scope resolves params, locals, occurrences and free names") {
  std::string src =
      "int add_scaled(int a, int b) {\n"
      "  int scale = 2;\n"
      "  int acc = a;\n"
      "  acc = acc + b * scale;\n"
      "  return acc + offset;\n"
      "}\n";
  ScopeMap scope = resolve_function_scope(src, profile(), "add_scaled");

  REQUIRE(scope.params.size() == 2);
  const auto* a = find_name(scope.params, "a");
  const auto* b = find_name(scope.params, "b");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->occurrences.size() == 2);  // declaration + initializer use
  CHECK(b->occurrences.size() == 2);

  const auto* scale = find_name(scope.locals, "scale");
  const auto* acc = find_name(scope.locals, "acc");
  REQUIRE(scale);
  REQUIRE(acc);
  CHECK(scale->occurrences.size() == 2);
  CHECK(acc->occurrences.size() == 4);
  CHECK(scope.free_names == std::set<std::string>{"offset"});

  // Spans point at real identifier bytes.
  for (const Span& occ : acc->occurrences) {
    CHECK(src.substr(occ.begin, occ.end - occ.begin) == "acc");
  }
}

TEST_CASE("nested re-declarations fold into one entry") {
  std::string src =
      "int g(int n) {\n"
      "  int x = 1;\n"
      "  { int x = n; n = x + 1; }\n"
      "  return x;\n"
      "}\n";
  ScopeMap scope = resolve_function_scope(src, profile(), "g");
  const auto* x = find_name(scope.locals, "x");
  REQUIRE(x);
  CHECK(x->occurrences.size() == 4);  // two declarations, two uses
  const auto* n = find_name(scope.params, "n");
  REQUIRE(n);
  CHECK(n->occurrences.size() == 3);

  // Names stay unique across params and locals.
  std::set<std::string> names;
  for (const auto& e : scope.params) CHECK(names.insert(e.name).second);
  for (const auto& e : scope.locals) CHECK(names.insert(e.name).second);
}

TEST_CASE("declaration statement shapes") {
  std::string src =
      "int shapes(int n) {\n"
      "  int a = 1, b = n;\n"
      "  char *p = buf;\n"
      "  unsigned long big = 0;\n"
      "  int arr[4];\n"
      "  for (int i = 0; i < n; i = i + 1) { arr[i] = b; }\n"
      "  return a + big;\n"
      "}\n";
  ScopeMap scope = resolve_function_scope(src, profile(), "shapes");
  for (const char* name : {"a", "b", "p", "big", "arr", "i"}) {
    CAPTURE(name);
    CHECK(find_name(scope.locals, name) != nullptr);
  }
  CHECK(scope.free_names == std::set<std::string>{"buf"});
}

TEST_CASE("statements are not mistaken for declarations") {
  std::string src =
      "int h(int v) {\n"
      "  return v;\n"
      "}\n"
      "int k(int w) {\n"
      "  helper(w);\n"
      "  w = w + 1;\n"
      "  if (w) w = 0;\n"
      "  return w;\n"
      "}\n";
  ScopeMap scope = resolve_function_scope(src, profile(), "k");
  CHECK(scope.locals.empty());
  const auto* w = find_name(scope.params, "w");
  REQUIRE(w);
  CHECK(w->occurrences.size() == 7);
  CHECK(scope.free_names == std::set<std::string>{"helper"});
}

TEST_CASE("member accesses are not variable occurrences") {
  std::string src =
      "int h(Thing obj, int field) {\n"
      "  obj.field = field;\n"
      "  return obj.field;\n"
      "}\n";
  ScopeMap scope = resolve_function_scope(src, profile(), "h");
  const auto* field = find_name(scope.params, "field");
  const auto* obj = find_name(scope.params, "obj");
  REQUIRE(field);
  REQUIRE(obj);
  CHECK(field->occurrences.size() == 2);  // declaration + rhs use
  CHECK(obj->occurrences.size() == 3);
}

TEST_CASE("function span covers modifiers and annotations") {
  std::string src = "int before() { return 0; }\n"
                    "static long helper(int x) { return x; }\n";
  ScopeMap scope = resolve_function_scope(src, profile(), "helper");
  std::string text =
      src.substr(scope.function_span.begin,
                 scope.function_span.end - scope.function_span.begin);
  CHECK(text == "static long helper(int x) { return x; }");

  std::string java = "@Override int parse(int x) { return x; }";
  ScopeMap jscope = resolve_function_scope(java, profile(), "parse");
  CHECK(jscope.function_span.begin == 0);
}

TEST_CASE("missing function raises E_FUNCTION_NOT_FOUND") {
  try {
    resolve_function_scope("int a() { return 0; }", profile(), "nope", "src.cpp");
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(e.code() == std::string(kErrFunctionNotFound));
    CHECK(std::string(e.what()).find("src.cpp") != std::string::npos);
  }
}

TEST_CASE("prototypes are not definitions") {
  std::string src = "int f(int);\nint f(int x) { return x; }\nint g() { return f(1); }\n";
  auto tokens = tokenize(src, profile());
  auto defs = find_function_definitions(tokens, "f");
  REQUIRE(defs.size() == 1);
  std::string text = src.substr(defs[0].full_span.begin,
                                defs[0].full_span.end - defs[0].full_span.begin);
  CHECK(text == "int f(int x) { return x; }");
}

TEST_CASE("extract_function_text returns the first definition") {
  std::string src = "int pick(int a) { return a; }\nint pick(long b) { return 1; }";
  CHECK(extract_function_text(src, profile(), "pick") == "int pick(int a) { return a; }");
  CHECK_THROWS_AS(extract_function_text(src, profile(), "other"), Error);
}
