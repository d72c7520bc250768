#pragma once

#include <span>

#include "behavior_codec/distribution.hpp"
#include "behavior_codec/games.hpp"

namespace behavior_codec {

struct KsResult {
  double statistic = 0.0;    // D = sup |F_a - F_b|
  double p_value = 1.0;
  double effective_n = 0.0;  // n_a n_b / (n_a + n_b)
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Two-sample KS test with the asymptotic Kolmogorov p-value at the
/// effective sample size. Throws Error(EmptySample).
KsResult ks_test(std::span<const double> a, std::span<const double> b);
KsResult ks_test(std::span<const int> a, std::span<const int> b);
/// Distribution form; sizes come from observations(). A reference with zero
/// observations is treated as exact (one-sample test).
KsResult ks_test(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Nearest multiple of `width`, halves rounded away from zero.
int round_to_bin(int value, int width);
/// 5 for every game except Public Goods, which uses 2.
int default_relaxed_bin(GameId game);

/// KS test after rounding both samples to multiples of `bin_width`.
KsResult relaxed_ks(std::span<const int> a, std::span<const int> b, int bin_width);
KsResult relaxed_ks(const EmpiricalDistribution& a, const EmpiricalDistribution& b, int bin_width);

}  // namespace behavior_codec
