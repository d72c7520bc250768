#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "behavior_codec/config.hpp"
#include "behavior_codec/games.hpp"
#include "behavior_codec/gateway.hpp"
#include "behavior_codec/util.hpp"

namespace behavior_codec {

/// Distribution of an elicited value around a kernel center, clamped to the
/// action space.
struct KernelShape {
  enum class Kind { Peaked, Uniform, Gaussian };
  Kind kind = Kind::Peaked;
  /// Peaked: probability of returning the center exactly; otherwise uniform
  /// in [center - halfwidth, center + halfwidth].
  double peak_mass = 0.6;
  int halfwidth = 2;
  /// Gaussian: standard deviation, rounded to the nearest integer.
  double sd = 5.0;

  int draw(int center, const ActionSpace& space, util::Rng& rng) const;
};

/// Latent description carried by a synthetic code: the game it was crafted
/// for and the value it steers toward in that game's units.
struct CodeTraits {
  GameId family = GameId::Dictator;
  int latent = 0;

  friend bool operator==(const CodeTraits&, const CodeTraits&) = default;
};

/// Synthetic code text: a persona sentence, disposition sentences chosen by
/// the latent's position in the action range, optional extra sentences, and a
/// closing "signature" sentence that spells the family and latent in letters
/// (no digits, so the target never appears as a literal token).
std::string compose_code(const CodeTraits& traits, std::uint64_t variant,
                         std::span<const std::string> extra_sentences = {});
std::optional<CodeTraits> decode_code(std::string_view text);

/// Digits spelled as two-letter syllables, e.g. 30 -> "puzo".
std::string encode_latent(int value);
std::optional<int> decode_latent(std::string_view word);

/// Sentence the scripted model answers with for a decision.
std::string decision_sentence(GameId game, int value);

struct ScriptedBackendSpec {
  std::uint64_t seed = 0;
  KernelShape code_kernel{KernelShape::Kind::Peaked, 0.6, 2, 5.0};
  /// Used for any system prompt that is not a synthetic code, including the
  /// default assistant prompt.
  KernelShape default_kernel{KernelShape::Kind::Peaked, 0.7, 1, 5.0};
  /// Used when a code crafted for an allocation game is played in the risk
  /// game or vice versa.
  KernelShape cross_family_kernel{KernelShape::Kind::Uniform, 0.0, 12, 5.0};
  /// Default kernel center as a fraction of the action range.
  double default_center = 0.5;
  /// GenerateCode: probability that the first draft already sits on the
  /// target; otherwise the latent is off by a nonzero amount in
  /// [-offset_range, offset_range].
  double exact_start_rate = 0.3;
  int offset_range = 8;
  /// Probability that an elicitation answer contains no decision.
  double refusal_rate = 0.0;
  /// Probability that a crafting answer lacks the "You are" opening.
  double malformed_rate = 0.0;
  std::size_t embedding_dimension = 16;

  /// Reads keys such as `seed`, `kernel.shape`, `kernel.peak_mass`,
  /// `kernel.halfwidth`, `kernel.sd`, `default.center`, `default.*`,
  /// `cross.*`, `grammar.exact_start_rate`, `grammar.offset_range`,
  /// `refusal_rate`, `malformed_rate`, `embedding.dimension`.
  static ScriptedBackendSpec from_config(const Config& config);
  [[nodiscard]] Config to_config() const;
};

/// Deterministic stand-in for a chat and embedding model.
///
/// Every answer is a pure function of (spec, request): randomness is seeded
/// from the backend seed, the session nonce and the message contents, so
/// concurrent use cannot change results.
class ScriptedBackend final : public ChatBackend, public EmbeddingBackend {
 public:
  explicit ScriptedBackend(ScriptedBackendSpec spec, std::vector<GameScenario> scenarios = {});

  ChatResponse complete(const ChatRequest& request) override;
  EmbeddingVector embed(std::string_view text) override;
  [[nodiscard]] std::size_t dimension() const override { return spec_.embedding_dimension; }
  [[nodiscard]] std::string id() const override;

  [[nodiscard]] const ScriptedBackendSpec& spec() const noexcept { return spec_; }

  /// Kernel center a code with `traits` produces in `game`.
  [[nodiscard]] int center_for(const CodeTraits& traits, GameId game) const;
  [[nodiscard]] int default_center_for(GameId game) const;

 private:
  [[nodiscard]] std::optional<GameId> identify_game(std::string_view instruction) const;
  [[nodiscard]] std::string craft(const ChatRequest& request) const;
  [[nodiscard]] std::string answer(const ChatRequest& request) const;

  ScriptedBackendSpec spec_;
  std::vector<GameScenario> scenarios_;
};

}  // namespace behavior_codec
