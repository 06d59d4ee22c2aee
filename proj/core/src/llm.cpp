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

#include "layerbench/llm.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/sha256.hpp"

namespace layerbench {
namespace {

using nlohmann::json;

const std::unordered_map<std::string, const char*>& builtin_templates() {
  static const std::unordered_map<std::string, const char*> kTemplates = {
      {"understand.root_cause.analyze",
       R"(You are analyzing a defect in a software project.

Bug id: {{bug_id}}
Function '{{function_name}}' in file '{{file}}':

{{buggy_function}}

Output of the failing test run:

{{failing_output}}

Explain the root cause of the defect in one short paragraph. Describe the
mistake in the code, not the symptom in the test output.
)"},
      {"understand.root_cause.generate",
       R"(You are creating a new buggy variant of a function for a bug-fix benchmark.

Bug id: {{bug_id}}
Variant index: {{index}}

Root cause analysis of the original defect:

{{analysis}}

Original buggy function:

{{buggy_function}}

Original fixed function:

{{fixed_function}}

Write a NEW defect from the same root-cause family. It must be textually
different from the original buggy function and must not be a trivial
reformatting of it. Respond with exactly three sections:

<<<BUGGY>>>
(complete source file containing the new buggy version of the function)
<<<FIXED>>>
(the same file with the defect corrected)
<<<TEST>>>
(a complete test file that fails while the defect is present and passes once fixed)
)"},
      {"understand.behavior.generate",
       R"(You are creating a new buggy variant of a function for a bug-fix benchmark.

Bug id: {{bug_id}}
Variant index: {{index}}

Correct reference implementation:

{{fixed_function}}

Observed failure of a previous defect in this function:

{{failing_output}}

Introduce a plausible new defect into the reference implementation that
changes its observable behavior. Respond with exactly three sections:

<<<BUGGY>>>
(complete source file containing the buggy version of the function)
<<<FIXED>>>
(the same file with the defect corrected)
<<<TEST>>>
(a complete test file that fails while the defect is present and passes once fixed)
)"},
      {"refine.compile",
       R"(The following source file failed to compile.

Compiler output:

{{log}}

Source:

{{source}}

Fix the compilation problem without changing the intent of the code.
Respond with one section:

<<<SOURCE>>>
(the corrected complete source file)
)"},
      {"refine.test",
       R"(A generated test did not behave as required. The test must FAIL on the
buggy version of the code and PASS on the fixed version.

Observed problem:

{{log}}

Test source:

{{source}}

Rewrite the test so it meets the requirement. Respond with one section:

<<<SOURCE>>>
(the corrected complete test file)
)"},
      {"apply.rephrase.names",
       R"(Propose natural replacement names for identifiers used in the function
'{{function_name}}' below.

{{function_text}}

Identifiers to rename, one per line:

{{names}}

Respond with exactly one line per identifier, in the same order, using the
format:

old -> new

Every new name must be a valid identifier in a C-family language, must differ
from the old name, must not be a language keyword, and must not collide with
any other name visible in the function or with another proposed name.
)"},
      {"analyze.inject.bug",
       R"(Example defect taken from another project. Attempt: {{attempt}}

Buggy version of function '{{parent_function}}':

{{parent_buggy}}

Fixed version:

{{parent_fixed}}

Below is the file '{{path}}' from the project '{{repo}}':

{{file_text}}

Introduce a defect of the same kind into the function '{{function}}' of this
file. Do not modify anything outside that function. Respond with one section:

<<<FILE>>>
(the complete file content with the defect introduced)
)"},
      {"analyze.inject.tests",
       R"(The project '{{repo}}' contains a defect in function '{{function}}' of file
'{{path}}'. Attempt: {{attempt}}

Defective function:

{{function_text}}

Correct version of the same function:

{{original_text}}

Write a test file that fails while the defect is present and passes on the
correct version. The project is built with `{{build_cmd}}` and tested with
`{{test_cmd}}`; the test file will be placed in the project's tests directory
and picked up by that command. Respond with one section:

<<<TEST>>>
(the complete test file content)
)"},
  };
  return kTemplates;
}

std::string format_temperature(double temperature) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", temperature);
  return buf;
}

// Splits "https://host[:port]/path" into pieces httplib understands.
struct EndpointParts {
  std::string scheme_host;  // scheme://host[:port]
  std::string path;
};

EndpointParts split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(kErrConfig, "endpoint is not a URL: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

std::string http_complete(const ProviderConfig& provider, const std::string& prompt) {
  const char* api_key = std::getenv(provider.api_key_env.c_str());
  if (api_key == nullptr || *api_key == '\0') {
    throw Error(kErrLlmTransport,
                "environment variable " + provider.api_key_env + " is not set");
  }

  const EndpointParts parts = split_endpoint(provider.endpoint);
  httplib::Client client(parts.scheme_host);
  client.set_connection_timeout(static_cast<time_t>(provider.timeout_s), 0);
  client.set_read_timeout(static_cast<time_t>(provider.timeout_s), 0);
  client.set_bearer_token_auth(api_key);

  json body = {
      {"model", provider.model},
      {"temperature", provider.temperature},
      {"max_tokens", provider.max_tokens},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
  };

  httplib::Result res = client.Post(parts.path, body.dump(), "application/json");
  if (!res) {
    throw Error(kErrLlmTransport,
                "request to " + provider.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(kErrLlmTransport, "provider returned HTTP " + std::to_string(res->status) +
                                      ": " + res->body.substr(0, 512));
  }
  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
    throw Error(kErrLlmTransport, "malformed provider response");
  }
  return reply["choices"][0]["message"]["content"].get<std::string>();
}

}  // namespace

LlmMode llm_mode_from_string(const std::string& name) {
  if (name == "live") return LlmMode::kLive;
  if (name == "record") return LlmMode::kRecord;
  if (name == "replay") return LlmMode::kReplay;
  throw Error(kErrConfig, "unknown llm mode: " + name);
}

std::string to_string(LlmMode mode) {
  switch (mode) {
    case LlmMode::kLive: return "live";
    case LlmMode::kRecord: return "record";
    case LlmMode::kReplay: return "replay";
  }
  throw Error(kErrInternal, "bad llm mode value");
}

const char* builtin_template(const std::string& template_id) {
  const auto& all = builtin_templates();
  auto it = all.find(template_id);
  return it == all.end() ? nullptr : it->second;
}

LlmGateway::LlmGateway(LlmMode mode, std::filesystem::path transcript_dir,
                       ProviderConfig provider, std::filesystem::path template_dir,
                       Transport transport)
    : mode_(mode),
      transcript_dir_(std::move(transcript_dir)),
      template_dir_(std::move(template_dir)),
      provider_(std::move(provider)),
      transport_(transport ? std::move(transport) : Transport(http_complete)),
      bucket_tokens_(provider_.burst),
      bucket_refill_(std::chrono::steady_clock::now()) {
  if (transcript_dir_.empty()) {
    throw Error(kErrConfig, "transcript directory must be set");
  }
  std::filesystem::create_directories(transcript_dir_);
  load_transcripts();
}

LlmGateway::~LlmGateway() = default;

std::string LlmGateway::render_prompt(
    const std::string& template_id, const std::map<std::string, std::string>& slots) const {
  std::string text;
  bool found = false;
  if (!template_dir_.empty()) {
    const auto file = template_dir_ / (template_id + ".txt");
    if (std::filesystem::exists(file)) {
      text = read_file(file);
      found = true;
    }
  }
  if (!found) {
    if (const char* builtin = builtin_template(template_id)) {
      text = builtin;
      found = true;
    }
  }
  if (!found) {
    throw Error(kErrTemplateUnknown, "no template with id " + template_id);
  }

  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, text.npos);
      break;
    }
    const auto close = text.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(text, pos, text.npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::string name = text.substr(open + 2, close - open - 2);
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw Error(kErrSlotMissing,
                  "template " + template_id + " needs a value for slot '" + name + "'");
    }
    out += it->second;
    pos = close + 2;
  }
  return out;
}

std::string LlmGateway::cache_key(const std::string& template_id,
                                  const std::string& prompt) const {
  std::string material = template_id;
  material += '\x1f';
  material += prompt;
  material += '\x1f';
  material += provider_.model;
  material += '\x1f';
  material += format_temperature(provider_.temperature);
  return sha256_hex(material);
}

std::string LlmGateway::complete(const CompletionRequest& request) {
  const std::string prompt = render_prompt(request.template_id, request.slots);
  const std::string key = cache_key(request.template_id, prompt);

  std::shared_future<std::string> waiting;
  std::promise<std::string> mine;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto hit = responses_.find(key);
    if (hit != responses_.end()) {
      return hit->second;
    }
    if (mode_ == LlmMode::kReplay) {
      throw Error(kErrReplayMiss, "no transcript for template " + request.template_id +
                                      " with key " + key);
    }
    auto flight = in_flight_.find(key);
    if (flight != in_flight_.end()) {
      waiting = flight->second;
    } else {
      in_flight_.emplace(key, mine.get_future().share());
    }
  }
  if (waiting.valid()) {
    return waiting.get();
  }

  std::string response;
  try {
    response = transport_once(prompt);
  } catch (...) {
    std::lock_guard<std::mutex> lock(mutex_);
    mine.set_exception(std::current_exception());
    in_flight_.erase(key);
    throw;
  }

  {
    std::lock_guard<std::mutex> lock(mutex_);
    responses_[key] = response;
    mine.set_value(response);
    in_flight_.erase(key);
  }
  if (mode_ == LlmMode::kRecord) {
    persist(key, request.template_id, prompt, response);
  }
  return response;
}

std::string LlmGateway::transport_once(const std::string& prompt) {
  rate_limit_acquire();
  transport_calls_.fetch_add(1);
  return transport_(provider_, prompt);
}

void LlmGateway::rate_limit_acquire() {
  using clock = std::chrono::steady_clock;
  std::unique_lock<std::mutex> lock(bucket_mutex_);
  for (;;) {
    const auto now = clock::now();
    const double elapsed = std::chrono::duration<double>(now - bucket_refill_).count();
    bucket_refill_ = now;
    bucket_tokens_ = std::min(static_cast<double>(provider_.burst),
                              bucket_tokens_ + elapsed * provider_.requests_per_second);
    if (bucket_tokens_ >= 1.0) {
      bucket_tokens_ -= 1.0;
      return;
    }
    const double wait_s = (1.0 - bucket_tokens_) / provider_.requests_per_second;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    lock.lock();
  }
}

void LlmGateway::load_transcripts() {
  if (!std::filesystem::exists(transcript_dir_)) {
    return;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(transcript_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("key") || !record.contains("response")) {
        throw Error(kErrIo, "bad transcript record at " + file.string() + ":" +
                                std::to_string(line_no));
      }
      responses_[record["key"].get<std::string>()] = record["response"].get<std::string>();
    }
  }
}

void LlmGateway::persist(const std::string& key, const std::string& template_id,
                         const std::string& prompt, const std::string& response) {
  // Shard by key prefix so concurrent recorders rarely contend on one file
  // and replay can load everything regardless of how it was produced.
  const auto file = transcript_dir_ / (key.substr(0, 2) + ".jsonl");
  json record = {
      {"key", key},
      {"template_id", template_id},
      {"model", provider_.model},
      {"temperature", provider_.temperature},
      {"prompt", prompt},
      {"response", response},
  };
  std::lock_guard<std::mutex> lock(bucket_mutex_);
  std::ofstream out(file, std::ios::app);
  if (!out) {
    throw Error(kErrIo, "cannot append transcript to " + file.string());
  }
  out << record.dump() << '\n';
}

}  // namespace layerbench
