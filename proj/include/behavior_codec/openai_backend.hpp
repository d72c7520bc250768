#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "behavior_codec/config.hpp"
#include "behavior_codec/gateway.hpp"
#include "behavior_codec/rate_limiter.hpp"

namespace behavior_codec {

struct OpenAiSettings {
  /// Scheme, host, optional port and optional path prefix; requests go to
  /// `{base_url}/v1/chat/completions` and `{base_url}/v1/embeddings`.
  std::string base_url = "https://api.openai.com";
  std::string api_key;
  std::string chat_model = "gpt-4o-2024-05-13";
  std::string embedding_model = "text-embedding-3-large";
  /// 0 means "whatever the first response returns".
  std::size_t embedding_dimension = 0;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  std::chrono::seconds timeout{120};
  std::size_t requests_per_window = 60;
  std::chrono::milliseconds window{60'000};

  /// Reads the `live.*` keys (`live.api_key`, `live.base_url`,
  /// `live.chat_model`, ...). The CLI maps BEHAVIOR_CODEC_API_KEY and
  /// BEHAVIOR_CODEC_BASE_URL onto those keys.
  static OpenAiSettings from_config(const Config& config);
};

/// OpenAI-compatible chat and embedding client.
///
/// Retries transport failures, HTTP 429 and 5xx with exponential backoff;
/// 401/403 map to AuthError and other 4xx to BackendRefused. All requests
/// pass through one sliding-window rate limiter.
class OpenAiBackend final : public ChatBackend, public EmbeddingBackend {
 public:
  explicit OpenAiBackend(OpenAiSettings settings, Clock& clock);
  ~OpenAiBackend() override;

  ChatResponse complete(const ChatRequest& request) override;
  EmbeddingVector embed(std::string_view text) override;
  [[nodiscard]] std::size_t dimension() const override;
  [[nodiscard]] std::string id() const override;

  [[nodiscard]] const OpenAiSettings& settings() const noexcept { return settings_; }

 private:
  struct Impl;
  OpenAiSettings settings_;
  Clock& clock_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace behavior_codec
