#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "behavior_codec/analysis.hpp"
#include "behavior_codec/scripted_backend.hpp"
#include "behavior_codec/util.hpp"
#include "test_support.hpp"

using namespace behavior_codec;
using test_support::kind_of;

namespace {

TokenizedCode doc(std::string id, std::vector<std::string> tokens) {
  return {std::move(id), std::move(tokens), false};
}

// Aggregated TF-IDF written out term by term for a small corpus.
std::map<std::string, double> tfidf_reference(const std::vector<TokenizedCode>& docs) {
  const double n = static_cast<double>(docs.size());
  std::map<std::string, double> df;
  for (const auto& d : docs) {
    const std::set<std::string> seen(d.tokens.begin(), d.tokens.end());
    for (const auto& t : seen) df[t] += 1;
  }
  std::map<std::string, double> score;
  for (const auto& d : docs) {
    for (const auto& t : d.tokens) {
      score[t] += (1.0 / static_cast<double>(d.tokens.size())) * (std::log((1 + n) / (1 + df[t])) + 1);
    }
  }
  return score;
}

}  // namespace

TEST_CASE("tfidf hand corpus") {
  const std::vector<TokenizedCode> corpus{doc("1", {"fair", "fair", "give"}), doc("2", {"keep", "gain"}),
                                          doc("3", {"fair", "keep"})};
  const KeywordBasis basis = tfidf_keywords(corpus, 50);
  CHECK(basis.keywords == std::vector<std::string>{"fair", "keep", "gain", "give"});
  const auto ref = tfidf_reference(corpus);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    CHECK(basis.scores[i] == doctest::Approx(ref.at(basis.keywords[i])).epsilon(1e-12));
  }
  CHECK(basis.scores[0] == doctest::Approx(1.5023).epsilon(1e-4));
  CHECK(basis.scores[1] == doctest::Approx(1.2877).epsilon(1e-4));
  CHECK(basis.scores[2] == doctest::Approx(0.8466).epsilon(1e-4));
  CHECK(basis.scores[3] == doctest::Approx(0.5644).epsilon(1e-4));
  CHECK(tfidf_keywords(corpus, 2).keywords == std::vector<std::string>{"fair", "keep"});
}

TEST_CASE("tfidf properties") {
  // A term in every document scores lower per occurrence than a rare one.
  const std::vector<TokenizedCode> c{doc("1", {"common", "rare"}), doc("2", {"common", "other"}),
                                     doc("3", {"common", "more"})};
  const auto b = tfidf_keywords(c);
  CHECK(b.size() == 4);
  const auto ref = tfidf_reference(c);
  CHECK(ref.at("rare") > ref.at("common") / 3.0);

  util::Rng rng(4);
  const std::vector<std::string> vocab{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
  std::vector<TokenizedCode> docs;
  for (int i = 0; i < 12; ++i) {
    std::vector<std::string> t;
    for (int k = 0; k < 6; ++k) t.push_back(vocab[static_cast<std::size_t>(rng.uniform_int(0, 7))]);
    docs.push_back(doc(std::to_string(i), t));
  }
  const auto forward = tfidf_keywords(docs, 5);
  std::reverse(docs.begin(), docs.end());
  const auto backward = tfidf_keywords(docs, 5);
  CHECK(forward.keywords == backward.keywords);
  for (std::size_t i = 0; i < forward.size(); ++i) {
    CHECK(forward.scores[i] == doctest::Approx(backward.scores[i]).epsilon(1e-12));
    CHECK(forward.scores[i] > 0.0);
    if (i > 0) CHECK(forward.scores[i] <= forward.scores[i - 1]);
  }
  CHECK(std::set<std::string>(forward.keywords.begin(), forward.keywords.end()).size() == forward.size());
  CHECK(kind_of([&] { (void)tfidf_keywords(std::vector<TokenizedCode>{doc("x", {"a"})}); }) ==
        ErrorKind::TooFewDocuments);
}

TEST_CASE("ties break lexicographically") {
  const std::vector<TokenizedCode> c{doc("1", {"zeta", "beta"}), doc("2", {"zeta", "beta"})};
  CHECK(tfidf_keywords(c).keywords == std::vector<std::string>{"beta", "zeta"});
}

TEST_CASE("keyword vectors") {
  KeywordBasis basis;
  basis.keywords = {"fair", "keep", "gain"};
  basis.scores = {3, 2, 1};
  CHECK(keyword_vector(doc("a", {"other"}), basis).bits == std::vector<std::uint8_t>{0, 0, 0});
  CHECK(keyword_vector(doc("b", {"gain", "fair", "keep"}), basis).bits == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(keyword_vector(doc("c", {"keep", "keep", "keep"}), basis).bits == std::vector<std::uint8_t>{0, 1, 0});
  CHECK(keyword_vector(doc("d", {"keep", "x", "fair"}), basis).bits ==
        keyword_vector(doc("e", {"fair", "fair", "keep"}), basis).bits);
  KeywordBasis empty;
  CHECK(kind_of([&] { (void)keyword_vector(doc("a", {"x"}), empty); }) == ErrorKind::PreconditionViolation);

  const std::vector<KeywordVector> v{keyword_vector(doc("b", {"gain"}), basis),
                                     keyword_vector(doc("c", {"fair", "keep"}), basis)};
  const DesignMatrix x = design_matrix(v);
  CHECK(x.rows() == 2);
  CHECK(x(0, 2) == 1.0);
  CHECK(x(1, 0) == 1.0);
  CHECK(x(1, 2) == 0.0);
}

TEST_CASE("mean behavior") {
  CHECK(mean_behavior(SampleSet{"a", GameId::Dictator, {10, 20, 60}, "s", 0}) == 30.0);
  CHECK(kind_of([] { (void)mean_behavior(SampleSet{}); }) == ErrorKind::EmptySamples);
}

TEST_CASE("regression ranks the driving keyword first") {
  util::Rng rng(31);
  KeywordBasis basis;
  basis.keywords = {"generous", "calm", "fair", "bold", "kind", "wise"};
  basis.scores = {6, 5, 4, 3, 2, 1};
  std::vector<KeywordVector> vectors;
  std::vector<double> means;
  for (int i = 0; i < 200; ++i) {
    KeywordVector v{std::to_string(i), {}};
    for (std::size_t j = 0; j < basis.size(); ++j) v.bits.push_back(rng.uniform() < 0.5 ? 1 : 0);
    means.push_back(20 + 80.0 * v.bits[0] + 5.0 * rng.normal());
    vectors.push_back(v);
  }
  for (auto method : {RegressionMethod::OLS, RegressionMethod::LASSO}) {
    const auto r = regress_keywords(basis, vectors, means, method, 0.3, 3);
    REQUIRE(r.top.size() == 3);
    CHECK(r.top[0].keyword == "generous");
    CHECK(r.top[0].coefficient > 0);
    CHECK(r.report.r_squared > 0.9);
    CHECK(std::abs(r.top[0].coefficient) >= std::abs(r.top[1].coefficient));
  }
}

TEST_CASE("identical keyword vectors surface rank deficiency") {
  KeywordBasis basis;
  basis.keywords = {"a", "b"};
  basis.scores = {2, 1};
  std::vector<KeywordVector> vectors(12, KeywordVector{"x", {1, 0}});
  std::vector<double> means;
  for (int i = 0; i < 12; ++i) means.push_back(i);
  const auto r = regress_keywords(basis, vectors, means, RegressionMethod::OLS);
  CHECK(r.report.rank_deficient);
  CHECK(kind_of([&] {
          (void)regress_keywords(basis, vectors, std::vector<double>{1.0}, RegressionMethod::OLS);
        }) == ErrorKind::DimensionError);
}

TEST_CASE("rank-one keyword data drives the first component") {
  util::Rng rng(2);
  std::vector<KeywordVector> vectors;
  std::vector<double> means;
  for (int i = 0; i < 120; ++i) {
    const bool on = rng.uniform() < 0.5;
    KeywordVector v{std::to_string(i), {}};
    for (int j = 0; j < 10; ++j) v.bits.push_back(j < 5 ? on : (rng.uniform() < 0.05 ? 1 : 0));
    means.push_back((on ? 70.0 : 30.0) + rng.normal());
    vectors.push_back(v);
  }
  const auto r = pc_behavior_correlation(vectors, means, 3);
  CHECK(r.best_component == 0);
  // Scores are nearly two-valued, which caps rank correlation near sqrt(3)/2.
  CHECK(std::abs(r.per_component[0].rho) > 0.75);
  CHECK(r.per_component.size() == 3);
}

TEST_CASE("behavior unrelated to keywords gives weak correlations") {
  util::Rng rng(55);
  std::vector<KeywordVector> vectors;
  std::vector<double> means;
  for (int i = 0; i < 500; ++i) {
    KeywordVector v{std::to_string(i), {}};
    for (int j = 0; j < 20; ++j) v.bits.push_back(rng.uniform() < 0.3 ? 1 : 0);
    vectors.push_back(v);
    means.push_back(static_cast<double>(rng.uniform_int(0, 100)));
  }
  const auto r = pc_behavior_correlation(vectors, means, 5);
  for (const auto& c : r.per_component) CHECK(std::abs(c.rho) < 0.2);
  CHECK(kind_of([&] {
          (void)pc_behavior_correlation(std::span(vectors).first(9), std::span(means).first(9), 2);
        }) == ErrorKind::PreconditionViolation);
}

TEST_CASE("game similarity") {
  auto code = [](std::string id, GameId g) {
    BehavioralCode c;
    c.id = std::move(id);
    c.game = g;
    return c;
  };
  const std::vector<BehavioralCode> codes{code("d1", GameId::Dictator), code("d2", GameId::Dictator),
                                          code("b1", GameId::Bomb), code("b2", GameId::Bomb)};
  SUBCASE("shared vector gives ones") {
    std::vector<CodeEmbedding> e;
    for (const auto& c : codes) e.push_back({c.id, {{0.3, 0.4, 0.5}, "be"}});
    const SimilarityMatrix m = game_similarity(codes, e);
    const auto d = static_cast<std::size_t>(GameId::Dictator);
    const auto b = static_cast<std::size_t>(GameId::Bomb);
    CHECK(m.values[d][d] == doctest::Approx(1.0));
    CHECK(m.values[d][b] == doctest::Approx(1.0));
    CHECK(std::isnan(m.values[1][1]));
    CHECK(m.code_counts[d] == 2);
    CHECK(m.backend_id == "be");
  }
  SUBCASE("orthogonal clusters") {
    const std::vector<CodeEmbedding> e{{"d1", {{1, 0.01, 0}, "be"}}, {"d2", {{1, -0.01, 0}, "be"}},
                                       {"b1", {{0, 0, 1}, "be"}}, {"b2", {{0.01, 0, 1}, "be"}}};
    const SimilarityMatrix m = game_similarity(codes, e);
    const auto d = static_cast<std::size_t>(GameId::Dictator);
    const auto b = static_cast<std::size_t>(GameId::Bomb);
    CHECK(std::abs(m.values[d][b]) < 0.02);
    CHECK(m.values[d][b] == m.values[b][d]);
    CHECK(m.values[d][d] > 0.99);
  }
  SUBCASE("errors") {
    const std::vector<CodeEmbedding> mixed{{"d1", {{1, 0}, "x"}}, {"d2", {{1, 0}, "y"}},
                                           {"b1", {{1, 0}, "x"}}, {"b2", {{1, 0}, "x"}}};
    CHECK(kind_of([&] { (void)game_similarity(codes, mixed); }) == ErrorKind::MixedBackends);
    const std::vector<CodeEmbedding> partial{{"d1", {{1, 0}, "x"}}};
    CHECK(kind_of([&] { (void)game_similarity(codes, partial); }) == ErrorKind::MissingCache);
  }
}

TEST_CASE("scripted embeddings cluster by game and track behavior") {
  ScriptedBackend backend({});
  std::vector<BehavioralCode> codes;
  std::vector<CodeEmbedding> embeddings;
  std::vector<double> means;
  for (GameId g : kAllGames) {
    const ActionSpace& s = scenario(g).action_space;
    for (int k = 0; k < 8; ++k) {
      BehavioralCode c;
      c.game = g;
      c.id = std::string(to_string(g)) + std::to_string(k);
      const int latent = s.min + s.width() * k / 7;
      c.text = compose_code({g, latent}, static_cast<std::uint64_t>(k));
      codes.push_back(c);
      embeddings.push_back({c.id, backend.embed(c.text)});
      if (g == GameId::Dictator) means.push_back(latent);
    }
  }
  const SimilarityMatrix m = game_similarity(codes, embeddings);
  for (std::size_t i = 0; i < SimilarityMatrix::kGames; ++i) {
    double row_max = -2.0;
    for (std::size_t j = 0; j < SimilarityMatrix::kGames; ++j) {
      CHECK(std::abs(m.values[i][j] - m.values[j][i]) < 1e-12);
      CHECK(m.values[i][j] <= 1.0);
      CHECK(m.values[i][j] >= -1.0);
      if (j != i) row_max = std::max(row_max, m.values[i][j]);
    }
    CHECK(m.values[i][i] >= row_max);
  }

  const std::vector<CodeEmbedding> dictator(embeddings.begin(), embeddings.begin() + 8);
  const auto smooth = embedding_behavior_smoothness(dictator, means);
  CHECK(smooth.rho > 0.0);
}
