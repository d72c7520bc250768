#include "behavior_codec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

KeywordBasis tfidf_keywords(std::span<const TokenizedCode> codes, std::size_t k, GameId game) {
  if (codes.size() < 2) {
    throw Error(ErrorKind::TooFewDocuments, fmt::format("TF-IDF needs at least 2 documents, got {}", codes.size()));
  }
  std::map<std::string, int> document_frequency;
  for (const TokenizedCode& doc : codes) {
    const std::set<std::string> unique(doc.tokens.begin(), doc.tokens.end());
    for (const std::string& t : unique) ++document_frequency[t];
  }
  const double n_docs = static_cast<double>(codes.size());
  std::map<std::string, double> score;
  for (const TokenizedCode& doc : codes) {
    if (doc.tokens.empty()) continue;
    std::map<std::string, int> counts;
    for (const std::string& t : doc.tokens) ++counts[t];
    const double length = static_cast<double>(doc.tokens.size());
    for (const auto& [term, count] : counts) {
      const double idf = std::log((1.0 + n_docs) / (1.0 + document_frequency[term])) + 1.0;
      score[term] += count / length * idf;
    }
  }
  std::vector<std::pair<std::string, double>> ranked(score.begin(), score.end());
  // std::map iteration is lexicographic, so a stable sort keeps ties in order.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > k) ranked.resize(k);
  KeywordBasis basis;
  basis.game = game;
  for (auto& [term, s] : ranked) {
    basis.keywords.push_back(term);
    basis.scores.push_back(s);
  }
  return basis;
}

KeywordVector keyword_vector(const TokenizedCode& code, const KeywordBasis& basis) {
  if (basis.keywords.empty()) throw Error(ErrorKind::PreconditionViolation, "keyword basis is empty");
  const std::unordered_set<std::string> present(code.tokens.begin(), code.tokens.end());
  KeywordVector v;
  v.code_id = code.code_id;
  v.bits.reserve(basis.size());
  for (const std::string& k : basis.keywords) v.bits.push_back(present.contains(k) ? 1 : 0);
  return v;
}

DesignMatrix design_matrix(std::span<const KeywordVector> vectors) {
  if (vectors.empty()) throw Error(ErrorKind::DimensionError, "no keyword vectors");
  const std::size_t d = vectors.front().bits.size();
  DesignMatrix x(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].bits.size() != d) {
      throw Error(ErrorKind::DimensionError, fmt::format("keyword vector {} has {} bits, expected {}",
                                                         vectors[i].code_id, vectors[i].bits.size(), d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i].bits[j];
    }
  }
  return x;
}

double mean_behavior(const SampleSet& samples) {
  if (samples.values.empty()) {
    throw Error(ErrorKind::EmptySamples, fmt::format("code {} has no samples", samples.code_id));
  }
  double sum = 0.0;
  for (int v : samples.values) sum += v;
  return sum / static_cast<double>(samples.values.size());
}

namespace {

Eigen::VectorXd response_vector(std::span<const double> values, std::size_t expected) {
  if (values.size() != expected) {
    throw Error(ErrorKind::DimensionError,
                fmt::format("{} behaviors for {} keyword vectors", values.size(), expected));
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) y[static_cast<Eigen::Index>(i)] = values[i];
  return y;
}

}  // namespace

KeywordRegression regress_keywords(const KeywordBasis& basis, std::span<const KeywordVector> vectors,
                                   std::span<const double> mean_behaviors, RegressionMethod method,
                                   double lasso_alpha, std::size_t top_n) {
  const DesignMatrix x = design_matrix(vectors);
  if (static_cast<std::size_t>(x.cols()) != basis.size()) {
    throw Error(ErrorKind::DimensionError, "keyword vectors do not match the basis");
  }
  const Eigen::VectorXd y = response_vector(mean_behaviors, vectors.size());
  KeywordRegression out;
  out.report = method == RegressionMethod::OLS ? ols_fit(x, y) : lasso_fit(x, y, lasso_alpha);
  std::vector<RankedKeyword> all;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    all.push_back({basis.keywords[j], out.report.coefficients[static_cast<Eigen::Index>(j)]});
  }
  std::sort(all.begin(), all.end(), [](const RankedKeyword& a, const RankedKeyword& b) {
    const double ma = std::abs(a.coefficient);
    const double mb = std::abs(b.coefficient);
    if (ma != mb) return ma > mb;
    return a.keyword < b.keyword;
  });
  if (all.size() > top_n) all.resize(top_n);
  out.top = std::move(all);
  return out;
}

PcCorrelation pc_behavior_correlation(std::span<const KeywordVector> vectors, std::span<const double> mean_behaviors,
                                      int k) {
  if (vectors.size() < 10) {
    throw Error(ErrorKind::PreconditionViolation,
                fmt::format("PC correlation needs at least 10 codes, got {}", vectors.size()));
  }
  const DesignMatrix x = design_matrix(vectors);
  (void)response_vector(mean_behaviors, vectors.size());
  PcCorrelation out;
  out.pca = pca(x, k);
  double best = -1.0;
  for (Eigen::Index c = 0; c < out.pca.scores.cols(); ++c) {
    std::vector<double> scores(static_cast<std::size_t>(out.pca.scores.rows()));
    for (Eigen::Index i = 0; i < out.pca.scores.rows(); ++i) scores[static_cast<std::size_t>(i)] = out.pca.scores(i, c);
    out.per_component.push_back(spearman(scores, mean_behaviors));
    const CorrelationResult& r = out.per_component.back();
    if (!r.constant_input && std::abs(r.rho) > best) {
      best = std::abs(r.rho);
      out.best_component = static_cast<std::size_t>(c);
    }
  }
  return out;
}

namespace {

std::size_t game_index(GameId game) {
  return static_cast<std::size_t>(std::find(kAllGames.begin(), kAllGames.end(), game) - kAllGames.begin());
}

std::string common_backend(std::span<const CodeEmbedding> embeddings) {
  std::string backend;
  for (const CodeEmbedding& e : embeddings) {
    if (backend.empty()) {
      backend = e.embedding.backend_id;
    } else if (e.embedding.backend_id != backend) {
      throw Error(ErrorKind::MixedBackends,
                  fmt::format("embeddings from {} and {} cannot be compared", backend, e.embedding.backend_id));
    }
  }
  return backend;
}

}  // namespace

SimilarityMatrix game_similarity(std::span<const BehavioralCode> codes, std::span<const CodeEmbedding> embeddings) {
  SimilarityMatrix out;
  out.backend_id = common_backend(embeddings);
  std::map<std::string_view, const EmbeddingVector*> by_code;
  for (const CodeEmbedding& e : embeddings) by_code[e.code_id] = &e.embedding;

  std::array<std::vector<const EmbeddingVector*>, SimilarityMatrix::kGames> groups;
  for (const BehavioralCode& code : codes) {
    const auto it = by_code.find(code.id);
    if (it == by_code.end()) throw Error(ErrorKind::MissingCache, fmt::format("code {} has no embedding", code.id));
    groups[game_index(code.game)].push_back(it->second);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t g = 0; g < SimilarityMatrix::kGames; ++g) {
    out.code_counts[g] = groups[g].size();
    for (std::size_t h = g; h < SimilarityMatrix::kGames; ++h) {
      double sum = 0.0;
      std::size_t pairs = 0;
      if (g == h) {
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
          for (std::size_t j = i + 1; j < groups[g].size(); ++j) {
            sum += cosine_similarity(groups[g][i]->values, groups[g][j]->values);
            ++pairs;
          }
        }
        if (groups[g].size() == 1) {
          sum = 1.0;
          pairs = 1;
        }
      } else {
        for (const EmbeddingVector* a : groups[g]) {
          for (const EmbeddingVector* b : groups[h]) {
            sum += cosine_similarity(a->values, b->values);
            ++pairs;
          }
        }
      }
      const double value = pairs == 0 ? nan : sum / static_cast<double>(pairs);
      out.values[g][h] = value;
      out.values[h][g] = value;
    }
  }
  return out;
}

CorrelationResult embedding_behavior_smoothness(std::span<const CodeEmbedding> embeddings,
                                                std::span<const double> mean_behaviors) {
  if (embeddings.size() != mean_behaviors.size()) {
    throw Error(ErrorKind::DimensionError, "one mean behavior per embedding is required");
  }
  (void)common_backend(embeddings);
  std::vector<double> distance;
  std::vector<double> gap;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      const auto& a = embeddings[i].embedding.values;
      const auto& b = embeddings[j].embedding.values;
      if (a.size() != b.size()) throw Error(ErrorKind::DimensionError, "embedding dimensions differ");
      double ss = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) ss += (a[d] - b[d]) * (a[d] - b[d]);
      distance.push_back(std::sqrt(ss));
      gap.push_back(std::abs(mean_behaviors[i] - mean_behaviors[j]));
    }
  }
  return spearman(distance, gap);
}

}  // namespace behavior_codec
