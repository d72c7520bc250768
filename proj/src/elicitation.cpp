#include "behavior_codec/elicitation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"
#include "behavior_codec/prompts.hpp"
#include "behavior_codec/util.hpp"

namespace behavior_codec {

namespace {

constexpr std::uint64_t kCraftingSalt = 0xC0DEC0DEULL;

std::string ask_for_code(ChatBackend& backend, CraftingConversation& conversation,
                         const std::string& code_id, const CraftingOptions& options) {
  auto request_with = [&](int attempt) {
    ChatRequest r;
    r.messages = conversation.messages;
    r.temperature = options.temperature;
    r.model_name = options.model_name;
    r.session_nonce = util::mix(util::fnv1a(code_id), static_cast<std::uint64_t>(attempt), kCraftingSalt);
    return r;
  };

  const ChatResponse first = backend.complete(request_with(0));
  std::string text = prompts::clean_code_text(first.text);
  if (!prompts::starts_with_you_are(text)) {
    conversation.messages.push_back({"assistant", first.text});
    conversation.messages.push_back({"user", std::string(prompts::kReformatRequest)});
    const ChatResponse second = backend.complete(request_with(1));
    text = prompts::clean_code_text(second.text);
    if (!prompts::starts_with_you_are(text)) {
      throw Error(ErrorKind::MalformedCode,
                  fmt::format("code {} does not start with \"You are\" after a reformat request", code_id));
    }
  }
  conversation.messages.push_back({"assistant", text});
  return text;
}

void require_target_for(const GameScenario& game, const Behavior& target) {
  if (target.game != game.id) {
    throw Error(ErrorKind::PreconditionViolation,
                fmt::format("target belongs to {}, scenario is {}", to_string(target.game),
                            to_string(game.id)));
  }
  if (!game.action_space.contains(target.value)) {
    throw Error(ErrorKind::OutOfRange,
                fmt::format("target {} is not a valid {} action", target.value, to_string(game.id)));
  }
}

}  // namespace

std::string SystemTimestamper::stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string make_code_id(GameId game, int target, int repeat_index, int improve_index) {
  return fmt::format("{}-t{:03}-r{}-i{}", to_string(game), target, repeat_index, improve_index);
}

std::uint64_t sample_nonce(std::string_view code_id, std::size_t index, int attempt,
                           std::uint64_t salt) {
  return util::mix(util::fnv1a(code_id), index, static_cast<std::uint64_t>(attempt), salt);
}

BehavioralCode generate_code(ChatBackend& backend, const GameScenario& game, const Behavior& target,
                             int repeat_index, CraftingConversation& conversation,
                             Timestamper& clock, const CraftingOptions& options) {
  require_target_for(game, target);
  conversation.messages = {
      {"system", options.system_prompt},
      {"user", prompts::render_generate_code(game.instruction, target.value)},
  };
  BehavioralCode code;
  code.id = make_code_id(game.id, target.value, repeat_index, 0);
  code.game = game.id;
  code.target = target;
  code.repeat_index = repeat_index;
  code.improve_index = 0;
  code.text = ask_for_code(backend, conversation, code.id, options);
  code.created_at = clock.stamp();
  return code;
}

BehavioralCode improve_code(ChatBackend& backend, const GameScenario& game, const Behavior& target,
                            const BehavioralCode& previous, std::optional<int> observed_mode,
                            CraftingConversation& conversation, Timestamper& clock,
                            const CraftingOptions& options) {
  require_target_for(game, target);
  if (observed_mode && *observed_mode == target.value) {
    throw Error(ErrorKind::PreconditionViolation,
                "improve_code called although the observed mode already equals the target");
  }
  if (conversation.messages.empty() || conversation.messages.back().role != "assistant" ||
      conversation.messages.back().content != previous.text) {
    throw Error(ErrorKind::PreconditionViolation,
                "conversation does not end with the previous code");
  }
  const std::string mode_text =
      observed_mode ? std::to_string(*observed_mode) : std::string(prompts::kUnparseableMode);
  conversation.messages.push_back({"user", prompts::render_improve_code(mode_text, target.value)});

  BehavioralCode code;
  code.id = make_code_id(game.id, target.value, previous.repeat_index, previous.improve_index + 1);
  code.game = game.id;
  code.target = target;
  code.parent_id = previous.id;
  code.repeat_index = previous.repeat_index;
  code.improve_index = previous.improve_index + 1;
  code.text = ask_for_code(backend, conversation, code.id, options);
  code.created_at = clock.stamp();
  return code;
}

SampleSet collect_samples(ChatBackend& backend, const GameScenario& game,
                          std::string_view code_id, std::string_view system_prompt, int n,
                          const ElicitationOptions& options) {
  if (n < 1) throw Error(ErrorKind::PreconditionViolation, "sample count must be >= 1");
  SampleSet out;
  out.code_id = std::string(code_id);
  out.game = game.id;
  out.backend_id = backend.id();
  out.values.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bool parsed = false;
    for (int attempt = 0; attempt <= options.parse_retries && !parsed; ++attempt) {
      const ChatRequest request = ChatRequest::single_turn(
          std::string(system_prompt), game.instruction, options.temperature,
          sample_nonce(code_id, static_cast<std::size_t>(i), attempt, options.nonce_salt),
          options.model_name);
      const ChatResponse response = backend.complete(request);
      try {
        out.values.push_back(parse_behavior(response.text, game.action_space, options.strategy));
        parsed = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ParseFailure) throw;
      }
    }
    if (!parsed) ++out.missing_count;
  }
  return out;
}

SampleSet elicit_samples(ChatBackend& backend, const GameScenario& game,
                         const BehavioralCode& code, int n, const ElicitationOptions& options) {
  SampleSet out = collect_samples(backend, game, code.id, code.text, n, options);
  if (out.values.empty()) {
    throw Error(ErrorKind::AllSamplesFailed,
                fmt::format("none of the {} answers for code {} could be parsed", n, code.id));
  }
  return out;
}

int mode_of(std::span<const int> values) {
  if (values.empty()) throw Error(ErrorKind::EmptySamples, "mode of an empty sample");
  std::map<int, int> counts;
  for (int v : values) ++counts[v];
  int best = counts.begin()->first;
  int best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

int mode_of(const SampleSet& samples) { return mode_of(std::span<const int>(samples.values)); }

double LearnResult::convergence_rate() const {
  if (outcomes.empty()) return 0.0;
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                  [](const RepeatOutcome& o) { return o.converged; });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

namespace {

struct TaskResult {
  std::vector<BehavioralCode> codes;
  std::vector<SampleSet> samples;
  RepeatOutcome outcome;
  std::optional<TargetFailure> failure;
};

TaskResult run_repeat(ChatBackend& backend, const GameScenario& game, const Behavior& target,
                      int repeat_index, Timestamper& clock, const LearnOptions& options) {
  TaskResult result;
  result.outcome.target = target.value;
  result.outcome.repeat_index = repeat_index;
  try {
    CraftingConversation conversation;
    auto evaluate = [&](const BehavioralCode& code) -> std::optional<int> {
      SampleSet s = collect_samples(backend, game, code.id, code.text, options.samples_per_eval,
                                    options.elicitation);
      std::optional<int> mode;
      if (!s.values.empty()) mode = mode_of(s);
      result.codes.push_back(code);
      result.samples.push_back(std::move(s));
      result.outcome.final_code_id = code.id;
      result.outcome.final_mode = mode;
      return mode;
    };

    BehavioralCode current =
        generate_code(backend, game, target, repeat_index, conversation, clock, options.crafting);
    std::optional<int> mode = evaluate(current);
    for (int i = 1; i <= options.inner_improvements; ++i) {
      if (mode == target.value) break;
      current = improve_code(backend, game, target, current, mode, conversation, clock,
                             options.crafting);
      result.outcome.improvements = i;
      mode = evaluate(current);
    }
    result.outcome.converged = mode == target.value;
  } catch (const Error& e) {
    result.failure = TargetFailure{target.value, repeat_index, std::string(to_string(e.kind())), e.what()};
  }
  return result;
}

}  // namespace

LearnResult learn_codes(ChatBackend& backend, const GameScenario& game,
                        std::span<const Behavior> targets, Timestamper& clock,
                        const LearnOptions& options) {
  if (options.outer_repeats < 1 || options.inner_improvements < 0 || options.samples_per_eval < 1) {
    throw Error(ErrorKind::PreconditionViolation, "learn options out of range");
  }
  for (const Behavior& t : targets) require_target_for(game, t);

  const std::size_t repeats = static_cast<std::size_t>(options.outer_repeats);
  const std::size_t task_count = targets.size() * repeats;
  std::vector<TaskResult> slots(task_count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < task_count; task = next++) {
      slots[task] = run_repeat(backend, game, targets[task / repeats],
                               static_cast<int>(task % repeats) + 1, clock, options);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(task_count, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  LearnResult out;
  for (TaskResult& slot : slots) {
    for (std::size_t i = 0; i < slot.codes.size(); ++i) {
      if (options.on_code) options.on_code(slot.codes[i], slot.samples[i]);
      out.codes.push_back(std::move(slot.codes[i]));
      out.samples.push_back(std::move(slot.samples[i]));
    }
    out.outcomes.push_back(slot.outcome);
    if (slot.failure) out.failures.push_back(std::move(*slot.failure));
  }
  return out;
}

std::vector<ConsistencyRow> consistency_report(std::span<const BehavioralCode> codes,
                                               std::span<const SampleSet> samples) {
  std::map<std::string_view, const SampleSet*> by_code;
  for (const SampleSet& s : samples) by_code[s.code_id] = &s;
  std::vector<ConsistencyRow> rows;
  rows.reserve(codes.size());
  for (const BehavioralCode& code : codes) {
    const auto it = by_code.find(code.id);
    if (it == by_code.end() || it->second->values.size() < 2) {
      throw Error(ErrorKind::InsufficientSamples,
                  fmt::format("code {} needs at least two samples", code.id));
    }
    const std::vector<int>& v = it->second->values;
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (int x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (int x : v) ss += (x - mean) * (x - mean);
    rows.push_back({code.id, mean, std::sqrt(ss / n), v.size()});
  }
  return rows;
}

}  // namespace behavior_codec
