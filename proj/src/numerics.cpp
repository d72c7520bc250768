#include "behavior_codec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

namespace {

void require_shapes(const DesignMatrix& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorKind::DimensionError, "design matrix is empty");
  if (y.size() != x.rows()) {
    throw Error(ErrorKind::DimensionError,
                fmt::format("design has {} rows but response has {} entries", x.rows(), y.size()));
  }
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorKind::PreconditionViolation, "non-finite regression input");
}

double r_squared(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef, double intercept) {
  const Eigen::VectorXd residual = (y - x * coef).array() - intercept;
  const double sst = (y.array() - y.mean()).square().sum();
  if (sst == 0.0) return 0.0;
  return 1.0 - residual.squaredNorm() / sst;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

RegressionReport ols_fit(const DesignMatrix& x, const Eigen::VectorXd& y) {
  require_shapes(x, y);
  const Eigen::RowVectorXd means = x.colwise().mean();
  const DesignMatrix xc = x.rowwise() - means;
  const double ybar = y.mean();
  const Eigen::VectorXd yc = y.array() - ybar;

  RegressionReport report;
  report.method = RegressionMethod::OLS;
  report.coefficients = Eigen::VectorXd::Zero(x.cols());

  const Eigen::JacobiSVD<DesignMatrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double threshold = s.size() > 0 && s[0] > 0.0
                               ? static_cast<double>(std::max(x.rows(), x.cols())) *
                                     std::numeric_limits<double>::epsilon() * s[0]
                               : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > threshold) ++rank;
  }
  report.rank_deficient = rank < x.cols();

  if (rank > 0 && yc.squaredNorm() > 0.0) {
    const Eigen::VectorXd uty = svd.matrixU().leftCols(rank).transpose() * yc;
    const Eigen::VectorXd scaled = uty.array() / s.head(rank).array();
    report.coefficients = svd.matrixV().leftCols(rank) * scaled;
  }
  report.intercept = ybar - means.dot(report.coefficients);
  report.r_squared = r_squared(x, y, report.coefficients, report.intercept);
  return report;
}

double lasso_critical_alpha(const DesignMatrix& x, const Eigen::VectorXd& y) {
  require_shapes(x, y);
  const DesignMatrix xc = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  return (xc.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

double lasso_objective(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef,
                       double alpha) {
  require_shapes(x, y);
  const DesignMatrix xc = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double n = static_cast<double>(x.rows());
  return (yc - xc * coef).squaredNorm() / (2.0 * n) + alpha * coef.cwiseAbs().sum();
}

RegressionReport lasso_fit(const DesignMatrix& x, const Eigen::VectorXd& y, double alpha, double tolerance,
                           int max_sweeps) {
  require_shapes(x, y);
  if (!(alpha >= 0.0)) throw Error(ErrorKind::PreconditionViolation, "lasso alpha must be >= 0");
  const Eigen::RowVectorXd means = x.colwise().mean();
  const DesignMatrix xc = x.rowwise() - means;
  const double ybar = y.mean();
  const double n = static_cast<double>(x.rows());
  const Eigen::Index d = x.cols();

  const Eigen::VectorXd scale = xc.colwise().squaredNorm().transpose() / n;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd residual = y.array() - ybar;

  RegressionReport report;
  report.method = RegressionMethod::LASSO;
  report.lasso_alpha = alpha;
  // All-zero coefficients satisfy the optimality conditions exactly at or
  // above the critical alpha; sweeping would only leave rounding residue.
  if (alpha >= (xc.transpose() * residual).cwiseAbs().maxCoeff() / n) {
    report.coefficients = coef;
    report.intercept = ybar;
    report.r_squared = r_squared(x, y, coef, report.intercept);
    return report;
  }
  report.non_convergence = true;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double largest_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (scale[j] == 0.0) continue;
      const double old = coef[j];
      const double rho = xc.col(j).dot(residual) / n + scale[j] * old;
      const double updated = soft_threshold(rho, alpha) / scale[j];
      if (updated != old) {
        residual -= xc.col(j) * (updated - old);
        coef[j] = updated;
        largest_change = std::max(largest_change, std::abs(updated - old));
      }
    }
    report.sweeps = sweep;
    if (largest_change < tolerance) {
      report.non_convergence = false;
      break;
    }
  }
  report.coefficients = coef;
  report.intercept = ybar - means.dot(coef);
  report.r_squared = r_squared(x, y, coef, report.intercept);
  return report;
}

PCAResult pca(const DesignMatrix& x, int k) {
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorKind::DimensionError, "PCA input is empty");
  if (k < 1 || k > std::min(x.rows(), x.cols())) {
    throw Error(ErrorKind::PreconditionViolation,
                fmt::format("k = {} must lie in 1..{}", k, std::min(x.rows(), x.cols())));
  }
  PCAResult result;
  result.column_means = x.colwise().mean().transpose();
  const DesignMatrix xc = x.rowwise() - result.column_means.transpose();
  const Eigen::JacobiSVD<DesignMatrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double threshold = s.size() > 0 && s[0] > 0.0
                               ? static_cast<double>(std::max(x.rows(), x.cols())) *
                                     std::numeric_limits<double>::epsilon() * s[0]
                               : std::numeric_limits<double>::infinity();
  int nonzero = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > threshold) ++nonzero;
  }
  const int kept = std::min(k, nonzero);
  result.degenerate_rank = kept < k;

  result.components = svd.matrixV().leftCols(kept);
  for (int c = 0; c < kept; ++c) {
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < result.components.rows(); ++i) {
      if (std::abs(result.components(i, c)) > std::abs(result.components(pivot, c)) + 1e-12) pivot = i;
    }
    if (result.components(pivot, c) < 0.0) result.components.col(c) *= -1.0;
  }
  result.scores = xc * result.components;
  const double total = s.squaredNorm();
  for (int c = 0; c < kept; ++c) result.explained_variance_ratio.push_back(s[c] * s[c] / total);
  return result;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DimensionError, "correlation inputs differ in length");
  if (x.size() < 3) throw Error(ErrorKind::PreconditionViolation, "correlation needs at least 3 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CorrelationResult result;
  if (sxx == 0.0 || syy == 0.0) {
    result.constant_input = true;
    result.rho = std::numeric_limits<double>::quiet_NaN();
    result.p_value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  result.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = n - 2.0;
  const double denom = 1.0 - result.rho * result.rho;
  if (denom <= 0.0) {
    result.p_value = 0.0;
    return result;
  }
  const double t = std::abs(result.rho) * std::sqrt(dof / denom);
  const boost::math::students_t dist(dof);
  result.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  return result;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DimensionError, "correlation inputs differ in length");
  const std::vector<double> rx = mid_ranks(x);
  const std::vector<double> ry = mid_ranks(y);
  return pearson(rx, ry);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::DimensionError, fmt::format("vectors of length {} and {}", u.size(), v.size()));
  }
  // Scaling by the largest entry keeps the sums finite for huge inputs.
  double su = 0.0;
  double sv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su = std::max(su, std::abs(u[i]));
    sv = std::max(sv, std::abs(v[i]));
  }
  if (su == 0.0 || sv == 0.0) throw Error(ErrorKind::ZeroVector, "cosine similarity of a zero vector");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i] / su;
    const double b = v[i] / sv;
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

}  // namespace behavior_codec
