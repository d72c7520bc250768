#include "behavior_codec/gateway.hpp"

#include <cctype>
#include <optional>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

struct NumberToken {
  long long value;
  std::size_t end;
};

// Scans one number starting at `pos` (a digit). Returns nullopt for tokens
// that are not plain integers; `end` is always advanced past the token.
std::optional<NumberToken> scan_number(std::string_view text, std::size_t pos, std::size_t& end) {
  long long value = 0;
  bool overflow = false;
  auto take_digit = [&](char c) {
    if (value > 1'000'000'000LL) overflow = true;
    value = value * 10 + (c - '0');
  };
  std::size_t i = pos;
  while (i < text.size() && is_digit(text[i])) take_digit(text[i++]);
  // Thousands separators: ",ddd" groups not followed by another digit.
  while (i + 3 < text.size() && text[i] == ',' && is_digit(text[i + 1]) &&
         is_digit(text[i + 2]) && is_digit(text[i + 3]) &&
         (i + 4 >= text.size() || !is_digit(text[i + 4]))) {
    take_digit(text[i + 1]);
    take_digit(text[i + 2]);
    take_digit(text[i + 3]);
    i += 4;
  }
  bool integral = true;
  if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
    ++i;
    while (i < text.size() && is_digit(text[i])) {
      if (text[i] != '0') integral = false;
      ++i;
    }
  }
  end = i;
  const bool glued = i < text.size() && is_alpha(text[i]);
  if (!integral || glued || overflow) return std::nullopt;
  return NumberToken{value, i};
}

bool negative_sign_before(std::string_view text, std::size_t pos) {
  auto word_char_before = [&](std::size_t at) {
    return at > 0 && (is_alpha(text[at - 1]) || is_digit(text[at - 1]));
  };
  if (pos >= 1 && text[pos - 1] == '-') return !word_char_before(pos - 1);
  // U+2212 MINUS SIGN
  if (pos >= 3 && text.substr(pos - 3, 3) == "\xE2\x88\x92") return !word_char_before(pos - 3);
  return false;
}

}  // namespace

ChatRequest ChatRequest::single_turn(std::string system_prompt, std::string user_prompt,
                                     double temperature, std::uint64_t session_nonce,
                                     std::string model_name) {
  ChatRequest r;
  r.messages = {{"system", std::move(system_prompt)}, {"user", std::move(user_prompt)}};
  r.temperature = temperature;
  r.session_nonce = session_nonce;
  r.model_name = std::move(model_name);
  return r;
}

const std::string& ChatRequest::system_prompt() const {
  static const std::string empty;
  if (messages.empty() || messages.front().role != "system") return empty;
  return messages.front().content;
}

const std::string& ChatRequest::user_prompt() const {
  static const std::string empty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return empty;
}

void ChatRequest::validate() const {
  if (system_prompt().empty()) {
    throw Error(ErrorKind::EmptyInput, "chat request needs a non-empty system prompt");
  }
  if (user_prompt().empty()) {
    throw Error(ErrorKind::EmptyInput, "chat request needs a non-empty user prompt");
  }
  if (temperature < 0.0) {
    throw Error(ErrorKind::PreconditionViolation, "temperature must be non-negative");
  }
}

int parse_behavior(std::string_view text, const ActionSpace& space, ParseStrategy strategy) {
  std::optional<int> found;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    const bool glued_front = i > 0 && is_alpha(text[i - 1]);
    std::size_t end = i;
    const auto token = scan_number(text, i, end);
    if (token && !glued_front) {
      const long long v = negative_sign_before(text, i) ? -token->value : token->value;
      if (v >= space.min && v <= space.max && space.contains(static_cast<int>(v))) {
        found = static_cast<int>(v);
        if (strategy == ParseStrategy::FirstInRange) return *found;
      }
    }
    i = end;
  }
  if (!found) {
    throw Error(ErrorKind::ParseFailure,
                fmt::format("no integer in {}..{} found in response", space.min, space.max));
  }
  return *found;
}

}  // namespace behavior_codec
