#include "behavior_codec/scripted_backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"
#include "behavior_codec/prompts.hpp"

namespace behavior_codec {

namespace {

constexpr std::array<std::string_view, 10> kSyllables{"zo", "ka", "mi", "pu", "re",
                                                      "sa", "ti", "vo", "ne", "lu"};
constexpr std::string_view kNegativeMarker = "mu";
constexpr std::string_view kSignatureLead = "Your inner signature reads ";

constexpr std::string_view family_word(GameId id) {
  switch (id) {
    case GameId::Dictator: return "sharer";
    case GameId::Proposer: return "offerer";
    case GameId::Responder: return "acceptor";
    case GameId::Investor: return "truster";
    case GameId::Banker: return "reciprocator";
    case GameId::PublicGoods: return "contributor";
    case GameId::Bomb: return "gambler";
  }
  return "sharer";
}

bool is_risk_game(GameId id) { return id == GameId::Bomb; }

struct Band {
  std::array<std::string_view, 3> personas;
  std::array<std::string_view, 3> dispositions;
};

// Five bands over the latent's position in the action range.
constexpr std::array<Band, 5> kAllocationBands{{
    {{"You are an uncompromising negotiator who looks after your own position.",
      "You are a self-reliant strategist who rarely gives ground.",
      "You are a shrewd pragmatist focused on your own results."},
     {"You hold on to resources whenever possible and part with almost nothing.",
      "Your own benefit comes first and you concede very little to others.",
      "You treat every exchange as a chance to secure the largest share for yourself."}},
    {{"You are a practical thinker who weighs your own interests carefully.",
      "You are a measured dealmaker with a clear sense of self-interest.",
      "You are a prudent planner who protects your own outcome."},
     {"You favor your own interests while offering modest concessions.",
      "You keep the larger part for yourself but acknowledge the other side.",
      "You share a little when it keeps things cordial, but not much more."}},
    {{"You are a balanced mediator who values even outcomes.",
      "You are an evenhanded partner who respects both sides.",
      "You are a principled thinker guided by fairness."},
     {"You value fairness and look for splits that treat everyone alike.",
      "You aim for balance and avoid tilting outcomes toward anyone.",
      "You believe shared results should be equitable and reasonable."}},
    {{"You are a warm collaborator who cares about the people around you.",
      "You are a considerate companion who notices the needs of others.",
      "You are a kind-hearted partner who enjoys helping."},
     {"You lean toward giving others more than an even portion.",
      "You are happy to tilt outcomes in favor of your partners.",
      "You care about goodwill and willingly accept less so others gain."}},
    {{"You are a selfless altruist devoted to the welfare of others.",
      "You are a compassionate benefactor who gives freely.",
      "You are a devoted helper who finds joy in others' success."},
     {"You put the welfare of others far ahead of your own.",
      "You hand over nearly everything you have without hesitation.",
      "You measure success by how much others receive, not by what you keep."}},
}};

constexpr std::array<Band, 5> kRiskBands{{
    {{"You are a cautious planner who avoids danger.",
      "You are a careful guardian of what you already have.",
      "You are a conservative thinker who values safety."},
     {"You accept only small, safe rewards and never gamble.",
      "You avoid exposure to loss even if it means earning little.",
      "You prefer certainty over any chance of a larger prize."}},
    {{"You are a prudent decision maker with a low appetite for danger.",
      "You are a steady thinker who keeps exposure limited.",
      "You are a vigilant planner who prefers modest gains."},
     {"You take a little chance but stop well before danger grows.",
      "You seek moderate rewards while keeping losses unlikely.",
      "You tolerate mild uncertainty, never serious peril."}},
    {{"You are a calculated optimizer who balances reward and danger.",
      "You are a methodical analyst who weighs both sides evenly.",
      "You are a composed strategist who seeks the sensible middle."},
     {"You balance potential reward against the chance of loss.",
      "You look for the point where expected reward is highest.",
      "You take measured chances with a clear head."}},
    {{"You are an ambitious opportunist who likes a challenge.",
      "You are a confident challenger who pushes for more.",
      "You are a daring planner with a healthy appetite for reward."},
     {"You push for larger rewards and accept substantial danger.",
      "You are willing to gamble when the prize is attractive.",
      "You lean into uncertainty to chase bigger payoffs."}},
    {{"You are a bold thrill seeker who loves high stakes.",
      "You are a fearless adventurer who chases every prize.",
      "You are an audacious gambler at heart."},
     {"You chase the largest possible rewards and tolerate serious danger.",
      "You ignore caution and go for the maximum.",
      "You would rather risk everything than settle for little."}},
}};

double fraction_in(const ActionSpace& space, int value) {
  if (space.width() == 0) return 0.0;
  return static_cast<double>(value - space.min) / static_cast<double>(space.width());
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

KernelShape kernel_from(const Config& c, KernelShape base) {
  if (auto shape = c.get("shape")) {
    const std::string s = to_lower(*shape);
    if (s == "peaked") base.kind = KernelShape::Kind::Peaked;
    else if (s == "uniform") base.kind = KernelShape::Kind::Uniform;
    else if (s == "gaussian") base.kind = KernelShape::Kind::Gaussian;
    else throw Error(ErrorKind::ParseError, fmt::format("unknown kernel shape '{}'", *shape));
  }
  base.peak_mass = c.get_double("peak_mass", base.peak_mass);
  base.halfwidth = static_cast<int>(c.get_int("halfwidth", base.halfwidth));
  base.sd = c.get_double("sd", base.sd);
  if (base.peak_mass < 0.0 || base.peak_mass > 1.0 || base.halfwidth < 0 || base.sd < 0.0) {
    throw Error(ErrorKind::ParseError, "kernel parameters out of range");
  }
  return base;
}

void kernel_to(Config& c, std::string_view prefix, const KernelShape& k) {
  constexpr std::array<std::string_view, 3> names{"peaked", "uniform", "gaussian"};
  c.set(fmt::format("{}.shape", prefix), std::string(names[static_cast<std::size_t>(k.kind)]));
  c.set(fmt::format("{}.peak_mass", prefix), fmt::format("{}", k.peak_mass));
  c.set(fmt::format("{}.halfwidth", prefix), std::to_string(k.halfwidth));
  c.set(fmt::format("{}.sd", prefix), fmt::format("{}", k.sd));
}

}  // namespace

int KernelShape::draw(int center, const ActionSpace& space, util::Rng& rng) const {
  int value = center;
  switch (kind) {
    case Kind::Peaked:
      if (rng.uniform() >= peak_mass) value += static_cast<int>(rng.uniform_int(-halfwidth, halfwidth));
      break;
    case Kind::Uniform:
      value += static_cast<int>(rng.uniform_int(-halfwidth, halfwidth));
      break;
    case Kind::Gaussian:
      value += static_cast<int>(std::lround(sd * rng.normal()));
      break;
  }
  return space.clamp(value);
}

std::string encode_latent(int value) {
  std::string out;
  if (value < 0) out += kNegativeMarker;
  for (char d : std::to_string(std::abs(value))) out += kSyllables[static_cast<std::size_t>(d - '0')];
  return out;
}

std::optional<int> decode_latent(std::string_view word) {
  bool negative = false;
  if (word.starts_with(kNegativeMarker)) {
    negative = true;
    word.remove_prefix(kNegativeMarker.size());
  }
  if (word.empty() || word.size() % 2 != 0 || word.size() > 16) return std::nullopt;
  long long value = 0;
  for (std::size_t i = 0; i < word.size(); i += 2) {
    const auto it = std::find(kSyllables.begin(), kSyllables.end(), word.substr(i, 2));
    if (it == kSyllables.end()) return std::nullopt;
    value = value * 10 + (it - kSyllables.begin());
  }
  return static_cast<int>(negative ? -value : value);
}

std::string compose_code(const CodeTraits& traits, std::uint64_t variant,
                         std::span<const std::string> extra_sentences) {
  const ActionSpace& space = scenario(traits.family).action_space;
  const double f = std::clamp(fraction_in(space, traits.latent), 0.0, 1.0);
  const auto band_index = std::min<std::size_t>(4, static_cast<std::size_t>(f * 5.0));
  const Band& band =
      is_risk_game(traits.family) ? kRiskBands[band_index] : kAllocationBands[band_index];
  const std::uint64_t v = util::splitmix64(variant);
  std::string text(band.personas[v % 3]);
  text += ' ';
  text += band.dispositions[(v >> 16) % 3];
  for (const std::string& extra : extra_sentences) {
    text += ' ';
    text += extra;
  }
  text += fmt::format(" {}{} {}.", kSignatureLead, family_word(traits.family),
                      encode_latent(traits.latent));
  return text;
}

std::optional<CodeTraits> decode_code(std::string_view text) {
  const auto lead = text.rfind(kSignatureLead);
  if (lead == std::string_view::npos) return std::nullopt;
  std::string_view rest = text.substr(lead + kSignatureLead.size());
  const auto space_pos = rest.find(' ');
  if (space_pos == std::string_view::npos) return std::nullopt;
  const std::string_view family = rest.substr(0, space_pos);
  rest.remove_prefix(space_pos + 1);
  const auto stop = rest.find('.');
  if (stop == std::string_view::npos) return std::nullopt;
  const auto latent = decode_latent(rest.substr(0, stop));
  if (!latent) return std::nullopt;
  for (GameId id : kAllGames) {
    if (family_word(id) == family) return CodeTraits{id, *latent};
  }
  return std::nullopt;
}

std::string decision_sentence(GameId game, int value) {
  switch (game) {
    case GameId::Dictator: return fmt::format("I will give ${} to the other player.", value);
    case GameId::Proposer: return fmt::format("I offer ${} to the responder.", value);
    case GameId::Responder:
      return fmt::format("The smallest offer I would accept is ${}.", value);
    case GameId::Investor: return fmt::format("I send ${} to the banker.", value);
    case GameId::Banker: return fmt::format("I return ${} to the investor.", value);
    case GameId::PublicGoods:
      return fmt::format("I contribute ${} to the group project.", value);
    case GameId::Bomb: return fmt::format("I open {} boxes.", value);
  }
  return std::to_string(value);
}

ScriptedBackendSpec ScriptedBackendSpec::from_config(const Config& c) {
  ScriptedBackendSpec s;
  s.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  s.code_kernel = kernel_from(c.section("kernel"), s.code_kernel);
  s.default_kernel = kernel_from(c.section("default"), s.default_kernel);
  s.cross_family_kernel = kernel_from(c.section("cross"), s.cross_family_kernel);
  s.default_center = c.get_double("default.center", s.default_center);
  s.exact_start_rate = c.get_double("grammar.exact_start_rate", s.exact_start_rate);
  s.offset_range = static_cast<int>(c.get_int("grammar.offset_range", s.offset_range));
  s.refusal_rate = c.get_double("refusal_rate", s.refusal_rate);
  s.malformed_rate = c.get_double("malformed_rate", s.malformed_rate);
  s.embedding_dimension =
      static_cast<std::size_t>(c.get_int("embedding.dimension", static_cast<long long>(s.embedding_dimension)));
  if (s.embedding_dimension == 0) throw Error(ErrorKind::ParseError, "embedding dimension must be > 0");
  if (s.offset_range < 1) throw Error(ErrorKind::ParseError, "grammar.offset_range must be >= 1");
  return s;
}

Config ScriptedBackendSpec::to_config() const {
  Config c;
  c.set("seed", std::to_string(seed));
  kernel_to(c, "kernel", code_kernel);
  kernel_to(c, "default", default_kernel);
  kernel_to(c, "cross", cross_family_kernel);
  c.set("default.center", fmt::format("{}", default_center));
  c.set("grammar.exact_start_rate", fmt::format("{}", exact_start_rate));
  c.set("grammar.offset_range", std::to_string(offset_range));
  c.set("refusal_rate", fmt::format("{}", refusal_rate));
  c.set("malformed_rate", fmt::format("{}", malformed_rate));
  c.set("embedding.dimension", std::to_string(embedding_dimension));
  return c;
}

ScriptedBackend::ScriptedBackend(ScriptedBackendSpec spec, std::vector<GameScenario> scenarios)
    : spec_(std::move(spec)), scenarios_(std::move(scenarios)) {
  if (scenarios_.empty()) {
    for (GameId id : kAllGames) scenarios_.push_back(scenario(id));
  }
}

std::string ScriptedBackend::id() const { return fmt::format("scripted-seed{}", spec_.seed); }

std::optional<GameId> ScriptedBackend::identify_game(std::string_view instruction) const {
  const auto first = instruction.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return std::nullopt;
  const auto last = instruction.find_last_not_of(" \t\r\n");
  instruction = instruction.substr(first, last - first + 1);
  for (const GameScenario& s : scenarios_) {
    if (s.instruction == instruction) return s.id;
  }
  return std::nullopt;
}

int ScriptedBackend::center_for(const CodeTraits& traits, GameId game) const {
  const ActionSpace& target = scenario(game).action_space;
  if (traits.family == game) return target.clamp(traits.latent);
  const double f = std::clamp(fraction_in(scenario(traits.family).action_space, traits.latent), 0.0, 1.0);
  const double g = is_risk_game(traits.family) == is_risk_game(game) ? f : 1.0 - f;
  return target.clamp(target.min + static_cast<int>(std::lround(g * target.width())));
}

int ScriptedBackend::default_center_for(GameId game) const {
  const ActionSpace& space = scenario(game).action_space;
  return space.clamp(space.min + static_cast<int>(std::lround(spec_.default_center * space.width())));
}

std::string ScriptedBackend::craft(const ChatRequest& request) const {
  const std::string& opening = request.messages[1].content;
  const auto fields = prompts::parse_generate_code(opening);
  const auto game = identify_game(fields->game_instruction);
  if (!game) throw Error(ErrorKind::BackendRefused, "scripted backend does not know this game");
  const ActionSpace& space = scenario(*game).action_space;
  const int target = fields->observed_behavior;

  util::Rng rng(util::mix(spec_.seed, request.session_nonce, util::fnv1a(opening),
                          request.messages.size()));

  auto last_assistant = [&]() -> std::optional<CodeTraits> {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
      if (it->role == "assistant") return decode_code(it->content);
    }
    return std::nullopt;
  };
  auto initial_latent = [&] {
    if (rng.uniform() < spec_.exact_start_rate) return target;
    const auto magnitude = static_cast<int>(rng.uniform_int(1, spec_.offset_range));
    return target + (rng.uniform() < 0.5 ? -magnitude : magnitude);
  };

  const std::string& latest = request.user_prompt();
  int latent = 0;
  bool reformat = false;
  if (&latest == &opening) {
    latent = initial_latent();
  } else if (prompts::is_reformat_request(latest)) {
    reformat = true;
    const auto previous = last_assistant();
    latent = previous ? previous->latent : initial_latent();
  } else if (const auto improve = prompts::parse_improve_code(latest)) {
    const auto previous = last_assistant();
    if (!previous) {
      latent = initial_latent();
    } else if (improve->mode) {
      latent = previous->latent + (improve->observed_behavior - *improve->mode);
    } else {
      latent = previous->latent;
    }
  } else {
    latent = initial_latent();
  }
  latent = space.clamp(latent);

  std::string code = compose_code({*game, latent}, rng.next());
  if (!reformat && rng.uniform() < spec_.malformed_rate) {
    return "Here is a system prompt you could use:\n\n" + code;
  }
  return code;
}

std::string ScriptedBackend::answer(const ChatRequest& request) const {
  const std::string& system = request.system_prompt();
  const std::string& user = request.user_prompt();
  const auto game = identify_game(user);
  if (!game) return "I am not sure what decision is being asked of me.";
  const ActionSpace& space = scenario(*game).action_space;

  util::Rng rng(util::mix(spec_.seed, request.session_nonce, util::fnv1a(system), util::fnv1a(user)));
  if (rng.uniform() < spec_.refusal_rate) return "I would prefer not to make this decision.";

  int value = 0;
  if (const auto traits = decode_code(system)) {
    const bool cross = is_risk_game(traits->family) != is_risk_game(*game);
    value = (cross ? spec_.cross_family_kernel : spec_.code_kernel)
                .draw(center_for(*traits, *game), space, rng);
  } else {
    value = spec_.default_kernel.draw(default_center_for(*game), space, rng);
  }
  return decision_sentence(*game, value);
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto started = std::chrono::steady_clock::now();
  const bool crafting =
      request.messages.size() >= 2 && request.messages[1].role == "user" &&
      prompts::parse_generate_code(request.messages[1].content).has_value();
  std::string text = crafting ? craft(request) : answer(request);
  return {std::move(text), id(), std::chrono::steady_clock::now() - started};
}

EmbeddingVector ScriptedBackend::embed(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::EmptyInput, "cannot embed empty text");
  const std::size_t dim = spec_.embedding_dimension;
  std::vector<double> v(dim, 0.0);

  // Hashed bag of words.
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = util::mix(spec_.seed, util::fnv1a(token));
    v[h % dim] += ((h >> 40) & 1U) ? 0.15 : -0.15;
    token.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();

  // Synthetic codes also carry their family and latent position.
  if (const auto traits = decode_code(text); traits && dim >= kAllGames.size() + 2) {
    v[static_cast<std::size_t>(traits->family)] += 1.0;
    const double f =
        std::clamp(fraction_in(scenario(traits->family).action_space, traits->latent), 0.0, 1.0);
    v[kAllGames.size()] += 1.2 * std::cos(std::numbers::pi * f);
    v[kAllGames.size() + 1] += 1.2 * std::sin(std::numbers::pi * f);
  }
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1e-3;
  return {std::move(v), id()};
}

}  // namespace behavior_codec
