#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "behavior_codec/games.hpp"

namespace behavior_codec {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// One chat-completion call. Each request is an independent session: the
/// backend sees exactly `messages` and nothing carried over from earlier calls.
struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  std::string model_name;
  std::uint64_t session_nonce = 0;

  static ChatRequest single_turn(std::string system_prompt, std::string user_prompt,
                                 double temperature, std::uint64_t session_nonce,
                                 std::string model_name = {});

  [[nodiscard]] const std::string& system_prompt() const;
  /// Content of the last user message.
  [[nodiscard]] const std::string& user_prompt() const;
  /// Throws Error(EmptyInput) unless the request starts with a non-empty
  /// system message and contains a non-empty user message.
  void validate() const;
};

struct ChatResponse {
  std::string text;
  std::string backend_id;
  std::chrono::nanoseconds latency{0};
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string backend_id;

  [[nodiscard]] std::size_t dimension() const noexcept { return values.size(); }
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Must be safe to call concurrently.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  [[nodiscard]] virtual std::string id() const = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  /// Throws Error(EmptyInput) for empty text.
  virtual EmbeddingVector embed(std::string_view text) = 0;
  [[nodiscard]] virtual std::size_t dimension() const = 0;
  [[nodiscard]] virtual std::string id() const = 0;
};

enum class ParseStrategy { FirstInRange, LastInRange };

/// Reads a decision from free text: integer tokens are scanned left to right
/// (currency symbols and thousands separators are ignored; numbers glued to
/// letters and non-integral decimals are skipped) and the first (or last)
/// token inside `space` wins. Throws Error(ParseFailure) if none qualifies.
int parse_behavior(std::string_view response_text, const ActionSpace& space,
                   ParseStrategy strategy = ParseStrategy::FirstInRange);

}  // namespace behavior_codec
