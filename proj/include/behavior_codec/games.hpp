#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace behavior_codec {

enum class GameId { Dictator, Proposer, Responder, Investor, Banker, PublicGoods, Bomb };

inline constexpr std::array<GameId, 7> kAllGames{
    GameId::Dictator, GameId::Proposer,    GameId::Responder, GameId::Investor,
    GameId::Banker,   GameId::PublicGoods, GameId::Bomb};

/// Lowercase snake-case name, e.g. "public_goods".
std::string_view to_string(GameId id) noexcept;
/// Accepts the snake-case name, the CamelCase enum name, or a hyphenated form.
std::optional<GameId> parse_game_id(std::string_view name);

/// Integer grid min, min+step, ..., max.
struct ActionSpace {
  int min = 0;
  int max = 0;
  int step = 1;

  [[nodiscard]] bool in_range(int v) const noexcept { return v >= min && v <= max; }
  [[nodiscard]] bool on_grid(int v) const noexcept { return (v - min) % step == 0; }
  [[nodiscard]] bool contains(int v) const noexcept { return in_range(v) && on_grid(v); }
  [[nodiscard]] int width() const noexcept { return max - min; }
  [[nodiscard]] int size() const noexcept { return width() / step + 1; }
  [[nodiscard]] int clamp(int v) const noexcept;
  [[nodiscard]] std::vector<int> values() const;
  [[nodiscard]] bool well_formed() const noexcept {
    return min <= max && step >= 1 && (max - min) % step == 0;
  }

  friend bool operator==(const ActionSpace&, const ActionSpace&) = default;
};

struct PayoffRule {
  GameId game = GameId::Dictator;
  std::map<std::string, double> parameters;

  [[nodiscard]] double parameter(const std::string& name) const;
};

struct GameScenario {
  GameId id = GameId::Dictator;
  std::string instruction;
  ActionSpace action_space;
  PayoffRule payoff_rule;
};

struct Behavior {
  GameId game = GameId::Dictator;
  int value = 0;

  friend bool operator==(const Behavior&, const Behavior&) = default;
};

/// Canonical scenario with the built-in instruction text.
const GameScenario& scenario(GameId id);

/// Canonical scenario whose instruction is read from `<dir>/<game>.txt` when
/// that file exists; falls back to the built-in text otherwise.
GameScenario scenario(GameId id, const std::filesystem::path& instruction_dir);

enum class Validity { Valid, OutOfRange, OffGrid };

Validity validate(const Behavior& behavior);
/// Throws Error(OutOfRange | OffGrid) unless the behavior is valid.
void require_valid(const Behavior& behavior);

/// Counterpart information some payoff rules need.
struct PayoffContext {
  std::optional<int> offer;              // Responder: the proposer's offer
  std::optional<int> responder_minimum;  // Proposer: smallest offer the responder accepts
  std::vector<int> other_contributions;  // PublicGoods: the other three players
};

/// Per-player payoffs in currency. Ordering per game:
///   Dictator (dictator, recipient); Proposer (proposer, responder);
///   Responder (proposer, responder); Investor (investor kept, banker received);
///   Banker (investor, banker); PublicGoods (self, other_1, other_2, other_3);
///   Bomb (expected payoff of the player).
struct Payoff {
  std::vector<double> components;
  std::optional<bool> accepted;  // Proposer/Responder only

  [[nodiscard]] double total() const;
};

/// Throws Error(InvalidAction) for actions validate() rejects and
/// Error(MissingContext) when the rule needs counterpart actions.
Payoff payoff(GameId game, int action, const PayoffContext& context = {});

}  // namespace behavior_codec
