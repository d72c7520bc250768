#include "behavior_codec/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

namespace {

constexpr int kSeriesTerms = 100;

KsResult finish(double d, double na, double nb) {
  KsResult r;
  r.statistic = d;
  r.effective_n = (nb <= 0.0) ? na : (na * nb) / (na + nb);
  r.p_value = d <= 0.0 ? 1.0 : kolmogorov_survival(std::sqrt(r.effective_n) * d);
  return r;
}

}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double p = 0.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double factor = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= kSeriesTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      sum += std::exp(factor * odd * odd);
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  } else {
    double sum = 0.0;
    for (int k = 1; k <= kSeriesTerms; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += (k % 2 == 1) ? term : -term;
    }
    p = 2.0 * sum;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySample, "KS test needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return finish(d, na, nb);
}

KsResult ks_test(std::span<const int> a, std::span<const int> b) {
  const std::vector<double> x(a.begin(), a.end());
  const std::vector<double> y(b.begin(), b.end());
  return ks_test(x, y);
}

KsResult ks_test(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySample, "KS test needs two non-empty distributions");
  if (a.observations() <= 0.0 && b.observations() <= 0.0) {
    throw Error(ErrorKind::EmptySample, "KS test needs the sample size of at least one side");
  }
  const auto& as = a.support();
  const auto& bs = b.support();
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double d = 0.0;
  while (i < as.size() || j < bs.size()) {
    const int t = (j >= bs.size() || (i < as.size() && as[i] <= bs[j])) ? as[i] : bs[j];
    while (i < as.size() && as[i] == t) fa += a.masses()[i++];
    while (j < bs.size() && bs[j] == t) fb += b.masses()[j++];
    d = std::max(d, std::abs(fa - fb));
  }
  // Accumulated rounding can leave ~1e-16 where the CDFs agree exactly.
  if (d < 1e-12) d = 0.0;
  if (a.observations() <= 0.0) return finish(d, b.observations(), 0.0);
  return finish(d, a.observations(), b.observations());
}

int round_to_bin(int value, int width) {
  if (width < 1) throw Error(ErrorKind::PreconditionViolation, "bin width must be >= 1");
  const int magnitude = std::abs(value);
  const int lower = magnitude / width * width;
  const int rounded = (magnitude - lower) * 2 >= width ? lower + width : lower;
  return value < 0 ? -rounded : rounded;
}

int default_relaxed_bin(GameId game) { return game == GameId::PublicGoods ? 2 : 5; }

KsResult relaxed_ks(std::span<const int> a, std::span<const int> b, int bin_width) {
  std::vector<int> x(a.begin(), a.end());
  std::vector<int> y(b.begin(), b.end());
  for (int& v : x) v = round_to_bin(v, bin_width);
  for (int& v : y) v = round_to_bin(v, bin_width);
  return ks_test(std::span<const int>(x), std::span<const int>(y));
}

KsResult relaxed_ks(const EmpiricalDistribution& a, const EmpiricalDistribution& b, int bin_width) {
  return ks_test(a.binned(bin_width), b.binned(bin_width));
}

}  // namespace behavior_codec
