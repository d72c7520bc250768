#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "behavior_codec/elicitation.hpp"
#include "behavior_codec/games.hpp"
#include "behavior_codec/gateway.hpp"
#include "behavior_codec/numerics.hpp"
#include "behavior_codec/text.hpp"

namespace behavior_codec {

struct KeywordBasis {
  GameId game = GameId::Dictator;
  std::vector<std::string> keywords;  // descending score
  std::vector<double> scores;

  [[nodiscard]] std::size_t size() const noexcept { return keywords.size(); }
};

/// Aggregated TF-IDF over one game's codes: tf = count/|d|,
/// idf = ln((1+N)/(1+df)) + 1, score = sum over documents of tf * idf.
/// The top `k` terms are kept, ties broken lexicographically. Throws
/// Error(TooFewDocuments) for fewer than two documents.
KeywordBasis tfidf_keywords(std::span<const TokenizedCode> codes, std::size_t k = 50,
                            GameId game = GameId::Dictator);

struct KeywordVector {
  std::string code_id;
  std::vector<std::uint8_t> bits;
};

/// bits[j] = 1 iff basis keyword j occurs in the code's tokens.
KeywordVector keyword_vector(const TokenizedCode& code, const KeywordBasis& basis);

/// Stacks keyword vectors into a 0/1 design matrix.
DesignMatrix design_matrix(std::span<const KeywordVector> vectors);

/// Arithmetic mean of a code's elicited values. Throws Error(EmptySamples).
double mean_behavior(const SampleSet& samples);

struct RankedKeyword {
  std::string keyword;
  double coefficient = 0.0;
};

struct KeywordRegression {
  RegressionReport report;
  std::vector<RankedKeyword> top;  // by |coefficient|, ties lexicographic
};

/// Regresses mean behavior on keyword occurrence and ranks the `top_n`
/// largest-magnitude coefficients.
KeywordRegression regress_keywords(const KeywordBasis& basis, std::span<const KeywordVector> vectors,
                                   std::span<const double> mean_behaviors, RegressionMethod method,
                                   double lasso_alpha = 0.3, std::size_t top_n = 10);

struct PcCorrelation {
  PCAResult pca;
  std::vector<CorrelationResult> per_component;
  /// Component with the largest |rho| (constant-input components skipped).
  std::size_t best_component = 0;
};

/// PCA of the keyword vectors and Spearman correlation of each component's
/// scores with mean behavior. Requires at least 10 codes.
PcCorrelation pc_behavior_correlation(std::span<const KeywordVector> vectors,
                                      std::span<const double> mean_behaviors, int k = 5);

struct CodeEmbedding {
  std::string code_id;
  EmbeddingVector embedding;
};

struct SimilarityMatrix {
  static constexpr std::size_t kGames = kAllGames.size();
  /// values[g][h] indexed in kAllGames order; NaN where a game has no codes.
  std::array<std::array<double, kGames>, kGames> values{};
  std::array<std::size_t, kGames> code_counts{};
  std::string backend_id;
};

/// Mean cosine similarity over cross-game code pairs; the diagonal averages
/// distinct same-game pairs (1 for a game with a single code). Throws
/// Error(MixedBackends) if embeddings come from more than one backend and
/// Error(MissingCache) if a code has no embedding.
SimilarityMatrix game_similarity(std::span<const BehavioralCode> codes, std::span<const CodeEmbedding> embeddings);

/// Spearman correlation, over all code pairs, between embedding distance and
/// the absolute difference of mean behaviors.
CorrelationResult embedding_behavior_smoothness(std::span<const CodeEmbedding> embeddings,
                                                std::span<const double> mean_behaviors);

}  // namespace behavior_codec
