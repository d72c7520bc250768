#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "behavior_codec/games.hpp"
#include "behavior_codec/gateway.hpp"

namespace behavior_codec {

/// A system prompt that steers the model toward `target`, with lineage.
struct BehavioralCode {
  std::string id;
  GameId game = GameId::Dictator;
  Behavior target;
  std::string text;
  std::optional<std::string> parent_id;
  int repeat_index = 1;   // 1..outer_repeats
  int improve_index = 0;  // 0 = generated, k = k-th improvement
  std::string created_at;

  friend bool operator==(const BehavioralCode&, const BehavioralCode&) = default;
};

/// Decisions elicited from one code. `values` excludes unparseable answers.
struct SampleSet {
  std::string code_id;
  GameId game = GameId::Dictator;
  std::vector<int> values;
  std::string backend_id;
  int missing_count = 0;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

/// Supplies `created_at` for new codes.
class Timestamper {
 public:
  virtual ~Timestamper() = default;
  virtual std::string stamp() = 0;
};

/// Current UTC time, ISO 8601 with seconds.
class SystemTimestamper final : public Timestamper {
 public:
  std::string stamp() override;
};

/// Always returns the same instant; used for reproducible scripted runs.
class FixedTimestamper final : public Timestamper {
 public:
  explicit FixedTimestamper(std::string instant = "2025-01-01T00:00:00Z")
      : instant_(std::move(instant)) {}
  std::string stamp() override { return instant_; }

 private:
  std::string instant_;
};

struct ElicitationOptions {
  double temperature = 1.0;
  std::string model_name;
  /// Re-queries after a ParseFailure before the sample counts as missing.
  int parse_retries = 3;
  ParseStrategy strategy = ParseStrategy::FirstInRange;
  /// Mixed into every session nonce; distinct salts give independent draws
  /// from the same code.
  std::uint64_t nonce_salt = 0;
};

struct CraftingOptions {
  double temperature = 1.0;
  std::string model_name;
  std::string system_prompt = "You are a helpful assistant.";
};

/// Message history of one GenerateCode/ImproveCode exchange.
struct CraftingConversation {
  std::vector<ChatMessage> messages;
};

/// Stable identifier such as "dictator-t030-r2-i1".
std::string make_code_id(GameId game, int target, int repeat_index, int improve_index);

/// Session nonce for sample `index` (attempt `attempt`) of a code; stable
/// across runs.
std::uint64_t sample_nonce(std::string_view code_id, std::size_t index, int attempt,
                           std::uint64_t salt);

/// Starts a crafting conversation. Throws Error(MalformedCode) if the answer
/// still lacks the "You are" opening after one reformat request.
BehavioralCode generate_code(ChatBackend& backend, const GameScenario& game, const Behavior& target,
                             int repeat_index, CraftingConversation& conversation,
                             Timestamper& clock, const CraftingOptions& options = {});

/// Continues `conversation` with the improvement request. `observed_mode` is
/// nullopt when no elicited answer could be parsed. Throws
/// Error(PreconditionViolation) if the mode already equals the target.
BehavioralCode improve_code(ChatBackend& backend, const GameScenario& game, const Behavior& target,
                            const BehavioralCode& previous, std::optional<int> observed_mode,
                            CraftingConversation& conversation, Timestamper& clock,
                            const CraftingOptions& options = {});

/// `n` independent sessions with `system_prompt`; never throws for parse
/// failures (they are counted in missing_count).
SampleSet collect_samples(ChatBackend& backend, const GameScenario& game,
                          std::string_view code_id, std::string_view system_prompt, int n,
                          const ElicitationOptions& options = {});

/// As collect_samples for a code; throws Error(AllSamplesFailed) if nothing
/// could be parsed.
SampleSet elicit_samples(ChatBackend& backend, const GameScenario& game,
                         const BehavioralCode& code, int n, const ElicitationOptions& options = {});

/// Most frequent value, ties to the smallest. Throws Error(EmptySamples).
int mode_of(std::span<const int> values);
int mode_of(const SampleSet& samples);

struct RepeatOutcome {
  int target = 0;
  int repeat_index = 0;
  bool converged = false;
  std::optional<int> final_mode;
  std::string final_code_id;
  int improvements = 0;
};

struct TargetFailure {
  int target = 0;
  int repeat_index = 0;
  std::string error_kind;
  std::string message;
};

struct LearnOptions {
  int outer_repeats = 5;
  int inner_improvements = 3;
  int samples_per_eval = 10;
  std::size_t parallelism = 1;
  CraftingOptions crafting;
  ElicitationOptions elicitation;
  /// Called once per code, serialized, in deterministic (target, repeat,
  /// improvement) order after all tasks finish.
  std::function<void(const BehavioralCode&, const SampleSet&)> on_code;
};

struct LearnResult {
  std::vector<BehavioralCode> codes;  // every code, intermediates included
  std::vector<SampleSet> samples;     // samples[i] belongs to codes[i]
  std::vector<RepeatOutcome> outcomes;
  std::vector<TargetFailure> failures;

  [[nodiscard]] double convergence_rate() const;
};

/// Outer loop over targets x repeats; inner loop of up to
/// `inner_improvements` revisions that stops once the sample mode equals the
/// target. Errors in one (target, repeat) are recorded and the run continues.
LearnResult learn_codes(ChatBackend& backend, const GameScenario& game,
                        std::span<const Behavior> targets, Timestamper& clock,
                        const LearnOptions& options = {});

struct ConsistencyRow {
  std::string code_id;
  double mean = 0.0;
  double std_dev = 0.0;  // population convention (divide by n)
  std::size_t n = 0;
};

/// Mean and population standard deviation of each code's samples. Throws
/// Error(InsufficientSamples) if a code has fewer than two samples or none.
std::vector<ConsistencyRow> consistency_report(std::span<const BehavioralCode> codes,
                                               std::span<const SampleSet> samples);

}  // namespace behavior_codec
