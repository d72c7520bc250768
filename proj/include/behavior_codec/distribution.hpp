#pragma once

#include <span>
#include <utility>
#include <vector>

#include "behavior_codec/games.hpp"

namespace behavior_codec {

/// Probability masses on a strictly increasing integer support.
///
/// `observations` is the number of raw observations the masses came from
/// (0 when unknown); the KS tests use it as the sample size.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;

  static EmpiricalDistribution from_samples(std::span<const int> values);
  /// (value, count) pairs; duplicates are merged and counts normalized.
  static EmpiricalDistribution from_counts(std::span<const std::pair<int, double>> counts);
  /// Validated masses: support strictly increasing, masses >= 0, sum 1 +- 1e-9.
  static EmpiricalDistribution from_masses(std::vector<int> support, std::vector<double> masses,
                                           double observations = 0.0);

  [[nodiscard]] const std::vector<int>& support() const noexcept { return support_; }
  [[nodiscard]] const std::vector<double>& masses() const noexcept { return masses_; }
  [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }
  [[nodiscard]] bool empty() const noexcept { return support_.empty(); }
  [[nodiscard]] double observations() const noexcept { return observations_; }

  /// P(X <= t).
  [[nodiscard]] double cdf(double t) const;
  [[nodiscard]] double mean() const;
  [[nodiscard]] double mass_at(int value) const;

  [[nodiscard]] EmpiricalDistribution shifted(int offset) const;
  /// Masses regrouped on multiples of `width` (rounding half away from zero).
  [[nodiscard]] EmpiricalDistribution binned(int width) const;
  /// Throws Error(OffGridValue) if a support point is not a valid action.
  void require_within(const ActionSpace& space) const;

 private:
  std::vector<int> support_;
  std::vector<double> masses_;
  double observations_ = 0.0;
};

/// Exact 1-D Wasserstein-1 distance, the integral of |F_p - F_q| computed by
/// sweeping the merged support. Throws Error(EmptyDistribution).
double wasserstein(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

}  // namespace behavior_codec
