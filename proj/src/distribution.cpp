#include "behavior_codec/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"
#include "behavior_codec/ks.hpp"

namespace behavior_codec {

EmpiricalDistribution EmpiricalDistribution::from_samples(std::span<const int> values) {
  std::map<int, double> counts;
  for (int v : values) counts[v] += 1.0;
  std::vector<std::pair<int, double>> pairs(counts.begin(), counts.end());
  return from_counts(pairs);
}

EmpiricalDistribution EmpiricalDistribution::from_counts(
    std::span<const std::pair<int, double>> counts) {
  std::map<int, double> merged;
  double total = 0.0;
  for (const auto& [value, count] : counts) {
    if (!(count >= 0.0) || !std::isfinite(count)) {
      throw Error(ErrorKind::ParseError, fmt::format("count for {} must be a finite non-negative number", value));
    }
    if (count == 0.0) continue;
    merged[value] += count;
    total += count;
  }
  EmpiricalDistribution out;
  if (total == 0.0) return out;
  for (const auto& [value, count] : merged) {
    out.support_.push_back(value);
    out.masses_.push_back(count / total);
  }
  out.observations_ = total;
  return out;
}

EmpiricalDistribution EmpiricalDistribution::from_masses(std::vector<int> support,
                                                         std::vector<double> masses,
                                                         double observations) {
  if (support.size() != masses.size()) {
    throw Error(ErrorKind::PreconditionViolation, "support and masses differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i > 0 && support[i] <= support[i - 1]) {
      throw Error(ErrorKind::PreconditionViolation, "support must be strictly increasing");
    }
    if (!(masses[i] >= 0.0) || !std::isfinite(masses[i])) {
      throw Error(ErrorKind::PreconditionViolation, "masses must be finite and non-negative");
    }
    sum += masses[i];
  }
  if (!support.empty() && std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::PreconditionViolation, fmt::format("masses sum to {}, not 1", sum));
  }
  EmpiricalDistribution out;
  out.support_ = std::move(support);
  out.masses_ = std::move(masses);
  out.observations_ = observations;
  return out;
}

double EmpiricalDistribution::cdf(double t) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < support_.size() && support_[i] <= t; ++i) acc += masses_[i];
  return std::min(acc, 1.0);
}

double EmpiricalDistribution::mean() const {
  if (empty()) throw Error(ErrorKind::EmptyDistribution, "mean of an empty distribution");
  double m = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) m += support_[i] * masses_[i];
  return m;
}

double EmpiricalDistribution::mass_at(int value) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), value);
  if (it == support_.end() || *it != value) return 0.0;
  return masses_[static_cast<std::size_t>(it - support_.begin())];
}

EmpiricalDistribution EmpiricalDistribution::shifted(int offset) const {
  EmpiricalDistribution out = *this;
  for (int& v : out.support_) v += offset;
  return out;
}

EmpiricalDistribution EmpiricalDistribution::binned(int width) const {
  if (width < 1) throw Error(ErrorKind::PreconditionViolation, "bin width must be >= 1");
  std::map<int, double> merged;
  for (std::size_t i = 0; i < support_.size(); ++i) merged[round_to_bin(support_[i], width)] += masses_[i];
  EmpiricalDistribution out;
  double sum = 0.0;
  for (const auto& [v, m] : merged) sum += m;
  for (const auto& [v, m] : merged) {
    out.support_.push_back(v);
    out.masses_.push_back(m / sum);
  }
  out.observations_ = observations_;
  return out;
}

void EmpiricalDistribution::require_within(const ActionSpace& space) const {
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!space.contains(support_[i])) {
      throw Error(ErrorKind::OffGridValue,
                  fmt::format("value {} is outside the action grid {}..{} step {}", support_[i],
                              space.min, space.max, space.step));
    }
  }
}

double wasserstein(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  if (p.empty() || q.empty()) {
    throw Error(ErrorKind::EmptyDistribution, "Wasserstein distance needs two non-empty distributions");
  }
  const auto& ps = p.support();
  const auto& qs = q.support();
  std::size_t i = 0;
  std::size_t j = 0;
  double fp = 0.0;
  double fq = 0.0;
  double total = 0.0;
  double previous = 0.0;
  bool started = false;
  while (i < ps.size() || j < qs.size()) {
    const int t = (j >= qs.size() || (i < ps.size() && ps[i] <= qs[j])) ? ps[i] : qs[j];
    if (started) total += std::abs(fp - fq) * (t - previous);
    while (i < ps.size() && ps[i] == t) fp += p.masses()[i++];
    while (j < qs.size() && qs[j] == t) fq += q.masses()[j++];
    previous = t;
    started = true;
  }
  return total;
}

}  // namespace behavior_codec
