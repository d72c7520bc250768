// Network-gated smoke test against an OpenAI-compatible endpoint. Reads
// BEHAVIOR_CODEC_API_KEY, BEHAVIOR_CODEC_BASE_URL and BEHAVIOR_CODEC_CHAT_MODEL.

#include <cstdlib>
#include <iostream>

#include <fmt/format.h>

#include "behavior_codec/elicitation.hpp"
#include "behavior_codec/openai_backend.hpp"

using namespace behavior_codec;

int main() {
  const char* key = std::getenv("BEHAVIOR_CODEC_API_KEY");
  if (key == nullptr || *key == '\0') {
    std::cout << "SKIP AC8 live backend smoke test: BEHAVIOR_CODEC_API_KEY is not set" << std::endl;
    return 77;
  }
  OpenAiSettings settings;
  settings.api_key = key;
  if (const char* url = std::getenv("BEHAVIOR_CODEC_BASE_URL")) settings.base_url = url;
  if (const char* model = std::getenv("BEHAVIOR_CODEC_CHAT_MODEL")) settings.chat_model = model;
  SteadyClock clock;
  OpenAiBackend backend(settings, clock);
  SystemTimestamper stamps;

  constexpr int kTarget = 50;
  const std::vector<Behavior> targets{{GameId::Dictator, kTarget}};
  LearnOptions options;
  options.outer_repeats = 1;
  options.inner_improvements = 3;
  options.samples_per_eval = 10;
  options.crafting.model_name = settings.chat_model;
  options.elicitation.model_name = settings.chat_model;
  const LearnResult result = learn_codes(backend, scenario(GameId::Dictator), targets, stamps, options);

  int matching = 0;
  for (const SampleSet& s : result.samples) {
    if (!s.values.empty() && mode_of(s) == kTarget) ++matching;
  }
  const bool pass = matching >= 1;
  std::cout << fmt::format("{} AC8 live backend smoke test: {} codes, {} with mode {}, {} failures",
                           pass ? "PASS" : "FAIL", result.codes.size(), matching, kTarget, result.failures.size())
            << std::endl;
  for (const TargetFailure& f : result.failures) std::cout << "  " << f.error_kind << ": " << f.message << std::endl;
  return pass ? 0 : 1;
}
