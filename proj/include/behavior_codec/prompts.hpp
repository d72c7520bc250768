#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace behavior_codec::prompts {

inline constexpr std::string_view kDefaultSystemPrompt = "You are a helpful assistant.";

/// Placeholders: {game_instruction}, {observed_behavior}.
inline constexpr std::string_view kGenerateCodeTemplate =
    R"(## Goal

Assuming a chatbot is playing games. Your goal is to craft a system prompt for this chatbot, so that with the crafted system prompt, the chatbot behaves in a certain way. 

## Game Instruction

One of the game instructions provided to the chatbot is:
{game_instruction}

## Desired Behavior

For this particular game, please generate a system prompt for the chatbot. With the generated system prompt and the above game instructions provided, the chatbot should make the decision: {observed_behavior}.

## Crafting Requirements

* The ultimate goal is to prompt the chatbot to behave towards the desired behavior under the given scenario, rather than being a precoded helpful assistant chatbot. 

* Craft the system prompt based on understanding the meaning of the desired behavior under the given game scenario. 

* Do not include information already included in the game instructions. 

* Craft a generalizable system prompt and avoid including any information specific to this particular game or directly implying the desired behavior. 

## Output Format

Directly output the crafted system prompt starting with "You are ...".)";

/// Placeholders: {mode}, {observed_behavior}.
inline constexpr std::string_view kImproveCodeTemplate =
    "Using your crafted system prompt, a chatbot outputs mostly {mode} instead of "
    "{observed_behavior}. Do you have any idea how to improve the system prompt?";

/// Sent once when a crafting answer does not start with "You are".
inline constexpr std::string_view kReformatRequest =
    "Please output only the improved system prompt itself, starting with \"You are ...\", "
    "without any additional explanation.";

/// Stand-in for {mode} when no elicited answer could be parsed.
inline constexpr std::string_view kUnparseableMode = "no valid decision";

std::string render_generate_code(std::string_view game_instruction, int observed_behavior);
std::string render_improve_code(std::string_view mode, int observed_behavior);

struct GenerateFields {
  std::string game_instruction;
  int observed_behavior = 0;
};
/// Inverse of render_generate_code; nullopt if `message` is not one.
std::optional<GenerateFields> parse_generate_code(std::string_view message);

struct ImproveFields {
  std::optional<int> mode;  // nullopt when the mode was unparseable
  int observed_behavior = 0;
};
std::optional<ImproveFields> parse_improve_code(std::string_view message);

[[nodiscard]] bool is_reformat_request(std::string_view message);

/// Removes surrounding whitespace, quotes and a leading "System prompt:"-style
/// label from a crafting answer.
std::string clean_code_text(std::string_view answer);
[[nodiscard]] bool starts_with_you_are(std::string_view text);

}  // namespace behavior_codec::prompts
