#include "behavior_codec/games.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"
#include "instructions_builtin.hpp"

namespace behavior_codec {

namespace {

std::string normalize_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

PayoffRule rule_for(GameId id) {
  PayoffRule rule{id, {}};
  switch (id) {
    case GameId::Dictator:
    case GameId::Proposer:
    case GameId::Responder:
      rule.parameters = {{"endowment", 100.0}};
      break;
    case GameId::Investor:
      rule.parameters = {{"endowment", 100.0}, {"multiplier", 3.0}};
      break;
    case GameId::Banker:
      rule.parameters = {{"invested_amount", 50.0}, {"received_amount", 150.0}, {"multiplier", 3.0}};
      break;
    case GameId::PublicGoods:
      rule.parameters = {{"endowment", 20.0}, {"multiplier", 0.5}, {"group_size", 4.0}};
      break;
    case GameId::Bomb:
      rule.parameters = {{"box_count", 100.0}, {"reward_per_box", 1.0}};
      break;
  }
  return rule;
}

ActionSpace space_for(GameId id) {
  switch (id) {
    case GameId::Banker: return {0, 150, 1};
    case GameId::PublicGoods: return {0, 20, 1};
    default: return {0, 100, 1};
  }
}

std::string trim_text(std::string text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

const std::array<GameScenario, 7>& table() {
  static const std::array<GameScenario, 7> scenarios = [] {
    std::array<GameScenario, 7> out;
    for (std::size_t i = 0; i < kAllGames.size(); ++i) {
      const GameId id = kAllGames[i];
      out[i] = GameScenario{id, trim_text(std::string(detail::builtin_instruction(id))),
                            space_for(id), rule_for(id)};
    }
    return out;
  }();
  return scenarios;
}

}  // namespace

std::string_view to_string(GameId id) noexcept {
  switch (id) {
    case GameId::Dictator: return "dictator";
    case GameId::Proposer: return "proposer";
    case GameId::Responder: return "responder";
    case GameId::Investor: return "investor";
    case GameId::Banker: return "banker";
    case GameId::PublicGoods: return "public_goods";
    case GameId::Bomb: return "bomb";
  }
  return "unknown";
}

std::optional<GameId> parse_game_id(std::string_view name) {
  const std::string wanted = normalize_name(name);
  for (GameId id : kAllGames) {
    if (normalize_name(to_string(id)) == wanted) return id;
  }
  return std::nullopt;
}

int ActionSpace::clamp(int v) const noexcept {
  v = std::clamp(v, min, max);
  return v - (v - min) % step;
}

std::vector<int> ActionSpace::values() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int v = min; v <= max; v += step) out.push_back(v);
  return out;
}

double PayoffRule::parameter(const std::string& name) const {
  const auto it = parameters.find(name);
  if (it == parameters.end()) {
    throw Error(ErrorKind::MissingContext,
                fmt::format("payoff rule for {} has no parameter '{}'", to_string(game), name));
  }
  return it->second;
}

double Payoff::total() const {
  return std::accumulate(components.begin(), components.end(), 0.0);
}

const GameScenario& scenario(GameId id) {
  return table()[static_cast<std::size_t>(id)];
}

GameScenario scenario(GameId id, const std::filesystem::path& instruction_dir) {
  GameScenario out = scenario(id);
  const auto path = instruction_dir / (std::string(to_string(id)) + ".txt");
  std::ifstream in(path);
  if (!in) return out;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = trim_text(buffer.str());
  if (text.empty()) {
    throw Error(ErrorKind::EmptyInput, fmt::format("instruction file {} is empty", path.string()));
  }
  out.instruction = std::move(text);
  return out;
}

Validity validate(const Behavior& behavior) {
  const ActionSpace& space = scenario(behavior.game).action_space;
  if (!space.in_range(behavior.value)) return Validity::OutOfRange;
  if (!space.on_grid(behavior.value)) return Validity::OffGrid;
  return Validity::Valid;
}

void require_valid(const Behavior& behavior) {
  switch (validate(behavior)) {
    case Validity::Valid: return;
    case Validity::OutOfRange: {
      const ActionSpace& s = scenario(behavior.game).action_space;
      throw Error(ErrorKind::OutOfRange,
                  fmt::format("{} is outside {}..{} for {}", behavior.value, s.min, s.max,
                              to_string(behavior.game)));
    }
    case Validity::OffGrid:
      throw Error(ErrorKind::OffGrid, fmt::format("{} is off the {} action grid", behavior.value,
                                                  to_string(behavior.game)));
  }
}

Payoff payoff(GameId game, int action, const PayoffContext& context) {
  if (validate({game, action}) != Validity::Valid) {
    throw Error(ErrorKind::InvalidAction,
                fmt::format("{} is not a valid {} action", action, to_string(game)));
  }
  const PayoffRule& rule = scenario(game).payoff_rule;
  const double x = action;

  switch (game) {
    case GameId::Dictator: {
      const double pot = rule.parameter("endowment");
      return {{pot - x, x}, std::nullopt};
    }
    case GameId::Proposer: {
      const double pot = rule.parameter("endowment");
      // Without a responder threshold the offer is treated as accepted.
      const bool accepted =
          !context.responder_minimum.has_value() || action >= *context.responder_minimum;
      if (!accepted) return {{0.0, 0.0}, false};
      return {{pot - x, x}, true};
    }
    case GameId::Responder: {
      if (!context.offer) {
        throw Error(ErrorKind::MissingContext, "responder payoff needs the proposer's offer");
      }
      const double pot = rule.parameter("endowment");
      const int offer = *context.offer;
      if (offer < 0 || offer > static_cast<int>(pot)) {
        throw Error(ErrorKind::InvalidAction, fmt::format("offer {} is outside 0..{}", offer, pot));
      }
      if (offer < action) return {{0.0, 0.0}, false};
      return {{pot - offer, static_cast<double>(offer)}, true};
    }
    case GameId::Investor: {
      const double pot = rule.parameter("endowment");
      return {{pot - x, rule.parameter("multiplier") * x}, std::nullopt};
    }
    case GameId::Banker: {
      const double received = rule.parameter("received_amount");
      return {{x, received - x}, std::nullopt};
    }
    case GameId::PublicGoods: {
      const auto group = static_cast<std::size_t>(rule.parameter("group_size"));
      if (context.other_contributions.size() != group - 1) {
        throw Error(ErrorKind::MissingContext,
                    fmt::format("public goods payoff needs {} other contributions, got {}",
                                group - 1, context.other_contributions.size()));
      }
      const double endowment = rule.parameter("endowment");
      double pool = x;
      for (int c : context.other_contributions) {
        if (validate({game, c}) != Validity::Valid) {
          throw Error(ErrorKind::InvalidAction, fmt::format("contribution {} is invalid", c));
        }
        pool += c;
      }
      const double share = rule.parameter("multiplier") * pool;
      Payoff out;
      out.components.push_back(endowment - x + share);
      for (int c : context.other_contributions) out.components.push_back(endowment - c + share);
      return out;
    }
    case GameId::Bomb: {
      const double boxes = rule.parameter("box_count");
      const double survive = (boxes - x) / boxes;
      return {{rule.parameter("reward_per_box") * x * survive}, std::nullopt};
    }
  }
  throw Error(ErrorKind::InvalidAction, "unknown game");
}

}  // namespace behavior_codec
