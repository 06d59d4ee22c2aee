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

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace layerbench {

// live: call the provider. record: like live, but persist every response to
// the transcript store and reuse stored ones. replay: serve exclusively
// from transcripts; any miss is an error and the transport is never touched.
enum class LlmMode { kLive, kRecord, kReplay };

LlmMode llm_mode_from_string(const std::string& name);  // Error(E_CONFIG)
std::string to_string(LlmMode mode);

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key_env = "LLM_API_KEY";
  double temperature = 0.0;
  int max_tokens = 4096;
  double requests_per_second = 2.0;
  int burst = 4;
  double timeout_s = 300.0;
};

struct CompletionRequest {
  std::string template_id;
  std::map<std::string, std::string> slots;
};

// Prompt-template rendering plus completion with caching, transcript
// record/replay, token-bucket rate limiting and in-flight deduplication.
class LlmGateway {
 public:
  // Returns the model's response text for a fully rendered prompt.
  using Transport =
      std::function<std::string(const ProviderConfig&, const std::string& prompt)>;

  // `template_dir` may be empty: the built-in templates are used. Files in
  // the directory override built-ins with the same id (<id>.txt).
  LlmGateway(LlmMode mode, std::filesystem::path transcript_dir,
             ProviderConfig provider = {}, std::filesystem::path template_dir = {},
             Transport transport = nullptr);
  ~LlmGateway();

  LlmGateway(const LlmGateway&) = delete;
  LlmGateway& operator=(const LlmGateway&) = delete;

  // Pure substitution of {{slot}} markers. Unknown template id raises
  // E_TEMPLATE_UNKNOWN; a marker without a binding raises E_SLOT_MISSING,
  // so an unresolved slot can never reach a provider.
  std::string render_prompt(const std::string& template_id,
                            const std::map<std::string, std::string>& slots) const;

  // Renders and completes the request according to the mode.
  std::string complete(const CompletionRequest& request);

  // Digest identifying a completion: template id, rendered prompt, model,
  // temperature.
  std::string cache_key(const std::string& template_id, const std::string& prompt) const;

  LlmMode mode() const { return mode_; }
  const ProviderConfig& provider() const { return provider_; }

  // Number of transport (network) invocations so far. Stays zero in replay.
  int transport_calls() const { return transport_calls_.load(); }

 private:
  std::string transport_once(const std::string& prompt);
  void load_transcripts();
  void persist(const std::string& key, const std::string& template_id,
               const std::string& prompt, const std::string& response);
  void rate_limit_acquire();

  LlmMode mode_;
  std::filesystem::path transcript_dir_;
  std::filesystem::path template_dir_;
  ProviderConfig provider_;
  Transport transport_;
  std::atomic<int> transport_calls_{0};

  mutable std::mutex mutex_;
  std::map<std::string, std::string> responses_;  // key -> response
  std::map<std::string, std::shared_future<std::string>> in_flight_;

  std::mutex bucket_mutex_;
  double bucket_tokens_;
  std::chrono::steady_clock::time_point bucket_refill_;
};

// Built-in template text for `template_id`, or nullptr.
const char* builtin_template(const std::string& template_id);

}  // namespace layerbench
