#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "behavior_codec/numerics.hpp"
#include "behavior_codec/util.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace behavior_codec;
using test_support::kind_of;

namespace {

DesignMatrix random_binary(util::Rng& rng, int n, int d, double p = 0.4) {
  DesignMatrix x(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.uniform() < p ? 1.0 : 0.0;
  }
  return x;
}

Eigen::VectorXd fitted(const DesignMatrix& x, const RegressionReport& r) {
  return (x * r.coefficients).array() + r.intercept;
}

}  // namespace

TEST_CASE("ols examples") {
  DesignMatrix x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXd y(4);
  y << 1, 3, 5, 7;
  const auto exact = ols_fit(x, y);
  CHECK(exact.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(exact.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  DesignMatrix x3(3, 1);
  x3 << 0, 1, 2;
  Eigen::VectorXd y3(3);
  y3 << 0, 1, 3;
  const auto three = ols_fit(x3, y3);
  CHECK(std::abs(three.coefficients[0] - 1.5) < 1e-9);
  CHECK(std::abs(three.intercept + 1.0 / 6.0) < 1e-9);
  // SSE = 1/6 (residuals 1/6, -1/3, 1/6); SST = 14/3.
  CHECK(three.r_squared == doctest::Approx(1.0 - (1.0 / 6.0) / (14.0 / 3.0)).epsilon(1e-12));

  const auto flat = ols_fit(x, Eigen::VectorXd::Constant(4, 5.0));
  CHECK(flat.coefficients[0] == 0.0);
  CHECK(flat.r_squared == 0.0);
  CHECK(flat.intercept == doctest::Approx(5.0));
}

TEST_CASE("ols residuals are orthogonal to the design") {
  util::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const DesignMatrix x = random_binary(rng, 60, 8);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) y[i] = 10 * rng.normal() + 3 * x(i, 0);
    const auto r = ols_fit(x, y);
    const Eigen::VectorXd residual = y - fitted(x, r);
    CHECK(std::abs(residual.sum()) < 1e-8);
    for (int j = 0; j < x.cols(); ++j) CHECK(std::abs(x.col(j).dot(residual)) < 1e-8);
    CHECK(r.r_squared <= 1.0);
  }
}

TEST_CASE("duplicated column leaves fitted values unchanged") {
  util::Rng rng(9);
  const DesignMatrix x = random_binary(rng, 40, 5);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = rng.normal() + 2 * x(i, 1) - x(i, 3);
  DesignMatrix wide(40, 6);
  wide << x, x.col(2);
  const auto base = ols_fit(x, y);
  const auto dup = ols_fit(wide, y);
  CHECK_FALSE(base.rank_deficient);
  CHECK(dup.rank_deficient);
  CHECK((fitted(x, base) - fitted(wide, dup)).cwiseAbs().maxCoeff() < 1e-8);
  // Minimum-norm solution splits the duplicated coefficient evenly.
  CHECK(dup.coefficients[2] == doctest::Approx(dup.coefficients[5]).epsilon(1e-8));
}

TEST_CASE("identical rows flag rank deficiency") {
  DesignMatrix x = DesignMatrix::Ones(10, 3);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0, 9);
  const auto r = ols_fit(x, y);
  CHECK(r.rank_deficient);
  CHECK(r.coefficients.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lasso with alpha zero matches ols") {
  util::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const DesignMatrix x = random_binary(rng, 80, 6);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) y[i] = rng.normal() + 4 * x(i, 0) - 2 * x(i, 4);
    const auto ols = ols_fit(x, y);
    const auto lasso = lasso_fit(x, y, 0.0);
    CHECK((ols.coefficients - lasso.coefficients).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(ols.intercept - lasso.intercept) < 1e-6);
    CHECK(lasso.method == RegressionMethod::LASSO);
    CHECK(lasso.lasso_alpha == 0.0);
  }
}

TEST_CASE("lasso critical alpha zeroes every coefficient") {
  util::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const DesignMatrix x = random_binary(rng, 50, 10);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y[i] = rng.normal() + 3 * x(i, 2);
    // Critical alpha by hand: max_j |<x_j - mean, y - mean>| / n.
    const Eigen::VectorXd yc = y.array() - y.mean();
    double critical = 0.0;
    for (int j = 0; j < 10; ++j) {
      const Eigen::VectorXd xc = x.col(j).array() - x.col(j).mean();
      critical = std::max(critical, std::abs(xc.dot(yc)) / 50.0);
    }
    CHECK(lasso_critical_alpha(x, y) == doctest::Approx(critical).epsilon(1e-12));
    const auto at = lasso_fit(x, y, critical);
    CHECK(at.coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(at.intercept == doctest::Approx(y.mean()));
    const auto below = lasso_fit(x, y, critical * 0.9);
    CHECK(below.coefficients.cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("lasso l1 norm shrinks as alpha grows") {
  util::Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const DesignMatrix x = random_binary(rng, 40, 8);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) y[i] = 5 * rng.normal() + 6 * x(i, 0) - 3 * x(i, 1);
    const double a1 = rng.uniform() * 2.0;
    const double a2 = a1 + 0.01 + rng.uniform() * 2.0;
    const double n1 = lasso_fit(x, y, a1).coefficients.lpNorm<1>();
    const double n2 = lasso_fit(x, y, a2).coefficients.lpNorm<1>();
    CHECK(n2 <= n1 + 1e-9);
  }
}

TEST_CASE("lasso objective never increases between sweeps") {
  util::Rng rng(8);
  const DesignMatrix x = random_binary(rng, 60, 12);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y[i] = rng.normal() * 3 + 5 * x(i, 3) + 2 * x(i, 7);
  double previous = lasso_objective(x, y, Eigen::VectorXd::Zero(12), 0.3);
  for (int sweeps = 1; sweeps <= 30; ++sweeps) {
    const auto r = lasso_fit(x, y, 0.3, 0.0, sweeps);
    const double obj = lasso_objective(x, y, r.coefficients, 0.3);
    CHECK(obj <= previous + 1e-12);
    previous = obj;
  }
  const auto capped = lasso_fit(x, y, 0.3, 0.0, 3);
  CHECK(capped.non_convergence);
  CHECK(capped.sweeps == 3);
  CHECK_FALSE(lasso_fit(x, y, 0.3).non_convergence);
}

TEST_CASE("pca examples") {
  DesignMatrix x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3.1;
  const auto p = pca(x, 2);
  CHECK(p.components(0, 0) == doctest::Approx(0.707).epsilon(1e-2));
  CHECK(p.components(1, 0) == doctest::Approx(0.707).epsilon(1e-2));
  CHECK(p.explained_variance_ratio[0] > 0.99);

  DesignMatrix one(5, 3);
  one << 1, 0, 7, 1, 1, 7, 1, 2, 7, 1, 3, 7, 1, 4, 7;
  const auto r1 = pca(one, 1);
  CHECK(std::abs(r1.components(1, 0)) == doctest::Approx(1.0));
  CHECK(r1.components(1, 0) > 0);
  CHECK(r1.explained_variance_ratio[0] == doctest::Approx(1.0));
  const auto r2 = pca(one, 2);
  CHECK(r2.degenerate_rank);
  CHECK(r2.components.cols() == 1);
  CHECK(kind_of([&] { (void)pca(one, 4); }) == ErrorKind::PreconditionViolation);
  CHECK(kind_of([&] { (void)pca(one, 0); }) == ErrorKind::PreconditionViolation);
}

TEST_CASE("pca invariants") {
  util::Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30, d = 8;
    const DesignMatrix x = random_binary(rng, n, d);
    const auto p = pca(x, d);
    const auto k = p.components.cols();
    const Eigen::MatrixXd gram = p.components.transpose() * p.components;
    CHECK((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.explained_variance_ratio.size(); ++i) {
      CHECK(p.explained_variance_ratio[i] >= 0.0);
      if (i > 0) CHECK(p.explained_variance_ratio[i] <= p.explained_variance_ratio[i - 1] + 1e-15);
      sum += p.explained_variance_ratio[i];
    }
    CHECK(sum <= 1.0 + 1e-12);
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    CHECK((p.scores * p.components.transpose() - centered).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(p.scores.colwise().mean().cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::MatrixXd cov = p.scores.transpose() * p.scores / (n - 1);
    const Eigen::MatrixXd off = cov - Eigen::MatrixXd(cov.diagonal().asDiagonal());
    CHECK(off.cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::Index at = 0;
      p.components.col(c).cwiseAbs().maxCoeff(&at);
      CHECK(p.components(at, c) > 0);
    }
  }
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> up{2, 5, 9, 10};
  const std::vector<double> neg{-1, -2, -3, -4};
  const std::vector<double> y{1, 3, 2, 4};
  CHECK(spearman(x, up).rho == doctest::Approx(1.0));
  CHECK(spearman(x, neg).rho == doctest::Approx(-1.0));
  CHECK(spearman(x, y).rho == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(spearman(x, y).rho == doctest::Approx(oracle::spearman_no_ties({1, 2, 3, 4}, {1, 3, 2, 4})));
  const std::vector<double> flat{3, 3, 3, 3};
  const auto c = spearman(x, flat);
  CHECK(c.constant_input);
  CHECK(std::isnan(c.rho));
  CHECK(kind_of([&] { (void)spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }) ==
        ErrorKind::PreconditionViolation);
  CHECK(kind_of([&] { (void)spearman(x, std::vector<double>{1, 2, 3}); }) == ErrorKind::DimensionError);
}

TEST_CASE("mid ranks average ties") {
  CHECK(mid_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman agrees with the rank-difference formula and is monotone invariant") {
  util::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 25; ++i) {
      x.push_back(rng.uniform());
      y.push_back(rng.uniform() + 0.5 * x.back());
    }
    const auto r = spearman(x, y);
    CHECK(r.rho == doctest::Approx(oracle::spearman_no_ties(x, y)).epsilon(1e-12));
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    std::vector<double> ex, cy;
    for (double v : x) ex.push_back(std::exp(3 * v));
    for (double v : y) cy.push_back(v * v * v - 7);
    CHECK(spearman(ex, cy).rho == doctest::Approx(r.rho).epsilon(1e-12));
  }
}

TEST_CASE("spearman p-value matches the incomplete beta form") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> y{2, 1, 4, 3, 10, 5, 9, 6, 8, 7};
  const auto r = spearman(x, y);
  // Two-sided Student-t tail on nu = n - 2 written as I_{nu/(nu+t^2)}(nu/2, 1/2).
  const double nu = 8.0;
  const double t2 = r.rho * r.rho * nu / (1.0 - r.rho * r.rho);
  CHECK(r.p_value == doctest::Approx(boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + t2))).epsilon(1e-10));
  const std::vector<double> strong{1, 2, 3, 4, 5, 6, 7, 8, 9, 11};
  CHECK(spearman(x, strong).p_value < 1e-6);
}

TEST_CASE("cosine similarity") {
  const std::vector<double> u{1, 1}, v{1, 0}, w{0, 1}, z{0, 0};
  CHECK(cosine_similarity(u, u) == doctest::Approx(1.0));
  CHECK(cosine_similarity(v, w) == 0.0);
  CHECK(cosine_similarity(u, v) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(kind_of([&] { (void)cosine_similarity(u, z); }) == ErrorKind::ZeroVector);
  CHECK(kind_of([&] { (void)cosine_similarity(u, std::vector<double>{1, 2, 3}); }) == ErrorKind::DimensionError);
  const std::vector<double> big{1e200, 1e200};
  CHECK(cosine_similarity(big, big) <= 1.0);
}
