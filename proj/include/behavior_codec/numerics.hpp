#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace behavior_codec {

/// Rows are observations (codes), columns features.
using DesignMatrix = Eigen::MatrixXd;

enum class RegressionMethod { OLS, LASSO };

struct RegressionReport {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double r_squared = 0.0;
  RegressionMethod method = RegressionMethod::OLS;
  std::optional<double> lasso_alpha;
  /// OLS: the centered design had rank < d; the minimum-norm solution is returned.
  bool rank_deficient = false;
  /// LASSO: coordinate descent hit the sweep cap before the tolerance.
  bool non_convergence = false;
  int sweeps = 0;
};

/// Least squares with an unpenalized intercept. Solves the centered problem
/// with an SVD pseudoinverse, so rank-deficient designs get the
/// minimum-norm coefficients. A constant response gives zero coefficients and
/// R^2 = 0.
RegressionReport ols_fit(const DesignMatrix& x, const Eigen::VectorXd& y);

/// Minimizes (1/(2n)) SSE + alpha * ||coef||_1 by cyclic coordinate descent
/// on centered data; the intercept is unpenalized. Stops when the largest
/// coefficient change in a sweep is below `tolerance`.
RegressionReport lasso_fit(const DesignMatrix& x, const Eigen::VectorXd& y, double alpha,
                           double tolerance = 1e-8, int max_sweeps = 100000);

/// Smallest alpha at which every LASSO coefficient is zero:
/// max_j |<x_j - mean(x_j), y - mean(y)>| / n.
double lasso_critical_alpha(const DesignMatrix& x, const Eigen::VectorXd& y);

/// LASSO objective at the given coefficients (intercept fitted to the means).
double lasso_objective(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef,
                       double alpha);

struct PCAResult {
  Eigen::MatrixXd components;  // d x k, orthonormal columns
  Eigen::MatrixXd scores;      // n x k
  std::vector<double> explained_variance_ratio;
  Eigen::VectorXd column_means;
  /// Fewer than k nonzero singular values; only those are returned.
  bool degenerate_rank = false;
};

/// PCA of the column-centered matrix by SVD. Each component's
/// largest-magnitude entry is made positive (first such entry on ties).
PCAResult pca(const DesignMatrix& x, int k);

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  /// One side has no variation; rho and p are NaN.
  bool constant_input = false;
};

/// Mid-ranks (ties averaged), 1-based.
std::vector<double> mid_ranks(std::span<const double> values);

/// Spearman rank correlation with a two-sided Student-t p-value on n-2
/// degrees of freedom. Requires equal lengths >= 3.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// Pearson correlation; NaN-flagged like spearman for constant input.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// <u,v> / (|u| |v|), clamped to [-1, 1]. Throws Error(ZeroVector) or
/// Error(DimensionError).
double cosine_similarity(std::span<const double> u, std::span<const double> v);

}  // namespace behavior_codec
