#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "behavior_codec/distribution.hpp"
#include "behavior_codec/elicitation.hpp"
#include "behavior_codec/gateway.hpp"
#include "behavior_codec/ks.hpp"

namespace behavior_codec {

/// A code together with its cached elicited samples. Samples are drawn once
/// and frozen for the whole optimization, which makes the loss deterministic.
struct LibraryEntry {
  BehavioralCode code;
  std::vector<int> samples;
};
using CodeLibrary = std::vector<LibraryEntry>;

/// Pairs codes with their sample sets by code id; codes without samples get
/// an empty cache.
CodeLibrary build_library(std::span<const BehavioralCode> codes, std::span<const SampleSet> samples);

/// Elicits `samples_per_code` answers under `game` for every entry whose
/// cache is empty. Entries are independent and filled in parallel.
void populate_cache(ChatBackend& backend, const GameScenario& game, CodeLibrary& library,
                    int samples_per_code, const ElicitationOptions& options = {},
                    std::size_t parallelism = 1);

/// Nonzero-weight threshold used when reporting active codes.
inline constexpr double kActiveWeight = 0.001;

struct MixtureWeights {
  std::vector<std::string> code_ids;
  std::vector<double> w;

  /// Each weight in [0,1], sum 1 +- tolerance, entries finite.
  [[nodiscard]] bool valid(double tolerance = 1e-9) const;
  [[nodiscard]] std::vector<std::size_t> active(double threshold = kActiveWeight) const;
  static MixtureWeights uniform(const CodeLibrary& library);
  static MixtureWeights one_hot(const CodeLibrary& library, std::size_t index);
};

enum class NormKind { L2, L1 };

struct AlignmentConfig {
  double alpha = 3.0;
  double tolerance = 1e-6;
  int max_restarts = 10;
  int samples_per_code = 10;
  int eval_samples = 1000;
  std::uint64_t rng_seed = 0;
  NormKind norm = NormKind::L2;
  /// Iteration cap for each smoothing stage of the optimizer.
  int max_iterations = 20000;
};

struct AlignmentResult {
  MixtureWeights weights;
  double loss = 0.0;
  double wasserstein = 0.0;
  double norm = 0.0;
  int attempts = 0;
  int iterations = 0;
};

/// Mass at v = sum_i w_i * (count of v in code i's samples) / |samples_i|.
/// Throws Error(PreconditionViolation) for weights off the simplex and
/// Error(MissingCache) when a weighted code has no samples.
EmpiricalDistribution estimate_distribution(const CodeLibrary& library, const MixtureWeights& weights);

/// W(estimate(w), target) + alpha * ||w||, evaluated directly.
double alignment_loss(const CodeLibrary& library, const MixtureWeights& weights,
                      const EmpiricalDistribution& target, const AlignmentConfig& config);

/// Minimizes the alignment loss over the probability simplex.
///
/// Each attempt starts from a uniform-[0,1) random vector normalized to sum
/// to one and runs accelerated projected gradient on a smoothed loss
/// (|r| -> sqrt(r^2 + mu^2) - mu) with mu shrinking geometrically; the last
/// stage stops once the loss improves by less than `tolerance`. Attempts
/// repeat until a valid weight vector is produced. Throws
/// Error(NoFeasibleSolution) after `max_restarts` attempts.
AlignmentResult align(const EmpiricalDistribution& target, const CodeLibrary& library,
                      const AlignmentConfig& config);

/// Draws a code by weight, then one of its cached samples uniformly.
std::vector<int> sample_mixture(const CodeLibrary& library, const MixtureWeights& weights,
                                std::size_t n, std::uint64_t seed);

/// Draws a code by weight, then elicits one fresh answer from `backend`
/// under `game`.
std::vector<int> sample_mixture_live(ChatBackend& backend, const GameScenario& game,
                                     const CodeLibrary& library, const MixtureWeights& weights,
                                     std::size_t n, std::uint64_t seed,
                                     const ElicitationOptions& options = {});

struct EvaluationReport {
  double wasserstein = 0.0;
  KsResult ks;
  KsResult relaxed;
  int bin_width = 5;
  std::size_t sample_count = 0;
  EmpiricalDistribution elicited;
};

EvaluationReport evaluate_samples(std::span<const int> samples, const EmpiricalDistribution& target,
                                  int bin_width);

/// Elicits `config.eval_samples` answers from the mixture under `game` and
/// compares them with `target`.
EvaluationReport evaluate_mixture(ChatBackend& backend, const GameScenario& game,
                                  const CodeLibrary& library, const MixtureWeights& weights,
                                  const EmpiricalDistribution& target, const AlignmentConfig& config,
                                  int bin_width, const ElicitationOptions& options = {});

/// Plays a mixture fitted on one game in `target_game`: every draw re-elicits
/// under the target game's instruction.
EvaluationReport transfer_evaluate(ChatBackend& backend, const CodeLibrary& source,
                                   const MixtureWeights& weights, const GameScenario& target_game,
                                   const EmpiricalDistribution& target_dist,
                                   const AlignmentConfig& config, int bin_width,
                                   const ElicitationOptions& options = {});

}  // namespace behavior_codec
