#include "behavior_codec/prompts.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace behavior_codec::prompts {

namespace {

void replace_once(std::string& text, std::string_view placeholder, std::string_view value) {
  const auto pos = text.find(placeholder);
  if (pos != std::string::npos) text.replace(pos, placeholder.size(), value);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> leading_int(std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) return std::nullopt;
  return value;
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

constexpr std::string_view kInstructionLead =
    "One of the game instructions provided to the chatbot is:\n";
constexpr std::string_view kInstructionTail = "\n\n## Desired Behavior";
constexpr std::string_view kDecisionLead = "the chatbot should make the decision: ";
constexpr std::string_view kImproveLead =
    "Using your crafted system prompt, a chatbot outputs mostly ";
constexpr std::string_view kImproveMiddle = " instead of ";

}  // namespace

std::string render_generate_code(std::string_view game_instruction, int observed_behavior) {
  std::string out(kGenerateCodeTemplate);
  replace_once(out, "{observed_behavior}", std::to_string(observed_behavior));
  replace_once(out, "{game_instruction}", game_instruction);
  return out;
}

std::string render_improve_code(std::string_view mode, int observed_behavior) {
  std::string out(kImproveCodeTemplate);
  replace_once(out, "{observed_behavior}", std::to_string(observed_behavior));
  replace_once(out, "{mode}", mode);
  return out;
}

std::optional<GenerateFields> parse_generate_code(std::string_view message) {
  if (!message.starts_with("## Goal")) return std::nullopt;
  const auto lead = message.find(kInstructionLead);
  if (lead == std::string_view::npos) return std::nullopt;
  const auto begin = lead + kInstructionLead.size();
  const auto end = message.find(kInstructionTail, begin);
  if (end == std::string_view::npos) return std::nullopt;
  const auto decision = message.find(kDecisionLead, end);
  if (decision == std::string_view::npos) return std::nullopt;
  const auto value = leading_int(message.substr(decision + kDecisionLead.size()));
  if (!value) return std::nullopt;
  return GenerateFields{std::string(message.substr(begin, end - begin)), *value};
}

std::optional<ImproveFields> parse_improve_code(std::string_view message) {
  if (!message.starts_with(kImproveLead)) return std::nullopt;
  message.remove_prefix(kImproveLead.size());
  const auto middle = message.find(kImproveMiddle);
  if (middle == std::string_view::npos) return std::nullopt;
  const auto observed = leading_int(message.substr(middle + kImproveMiddle.size()));
  if (!observed) return std::nullopt;
  ImproveFields out;
  out.observed_behavior = *observed;
  const std::string_view mode = message.substr(0, middle);
  if (auto m = leading_int(mode); m && std::to_string(*m) == mode) out.mode = *m;
  return out;
}

bool is_reformat_request(std::string_view message) { return message == kReformatRequest; }

std::string clean_code_text(std::string_view answer) {
  std::string_view s = trim(answer);
  if (s.starts_with("```")) {
    s.remove_prefix(3);
    const auto newline = s.find('\n');
    if (newline != std::string_view::npos && newline < 16) s.remove_prefix(newline + 1);
    if (s.ends_with("```")) s.remove_suffix(3);
    s = trim(s);
  }
  constexpr std::array<std::string_view, 4> labels{"**system prompt:**", "system prompt:",
                                                   "crafted system prompt:", "prompt:"};
  for (std::string_view label : labels) {
    if (starts_with_ci(s, label)) {
      s = trim(s.substr(label.size()));
      break;
    }
  }
  // Straight or curly quotes around the whole answer.
  constexpr std::array<std::pair<std::string_view, std::string_view>, 3> quotes{
      {{"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"'", "'"}}};
  for (const auto& [open, close] : quotes) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
      break;
    }
  }
  return std::string(s);
}

bool starts_with_you_are(std::string_view text) { return text.starts_with("You are"); }

}  // namespace behavior_codec::prompts
