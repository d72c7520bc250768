#include "behavior_codec/alignment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "behavior_codec/error.hpp"
#include "behavior_codec/util.hpp"

namespace behavior_codec {

CodeLibrary build_library(std::span<const BehavioralCode> codes, std::span<const SampleSet> samples) {
  std::map<std::string_view, const SampleSet*> by_code;
  for (const SampleSet& s : samples) by_code[s.code_id] = &s;
  CodeLibrary library;
  library.reserve(codes.size());
  for (const BehavioralCode& code : codes) {
    LibraryEntry entry{code, {}};
    if (const auto it = by_code.find(code.id); it != by_code.end()) entry.samples = it->second->values;
    library.push_back(std::move(entry));
  }
  return library;
}

void populate_cache(ChatBackend& backend, const GameScenario& game, CodeLibrary& library,
                    int samples_per_code, const ElicitationOptions& options, std::size_t parallelism) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < library.size(); i = next++) {
      if (!library[i].samples.empty()) continue;
      library[i].samples =
          collect_samples(backend, game, library[i].code.id, library[i].code.text, samples_per_code, options).values;
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(library.size(), 1));
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

bool MixtureWeights::valid(double tolerance) const {
  if (w.empty() || w.size() != code_ids.size()) return false;
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::vector<std::size_t> MixtureWeights::active(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > threshold) out.push_back(i);
  }
  return out;
}

MixtureWeights MixtureWeights::uniform(const CodeLibrary& library) {
  MixtureWeights out;
  for (const LibraryEntry& e : library) out.code_ids.push_back(e.code.id);
  out.w.assign(library.size(), library.empty() ? 0.0 : 1.0 / static_cast<double>(library.size()));
  return out;
}

MixtureWeights MixtureWeights::one_hot(const CodeLibrary& library, std::size_t index) {
  if (index >= library.size()) throw Error(ErrorKind::PreconditionViolation, "one-hot index out of range");
  MixtureWeights out;
  for (const LibraryEntry& e : library) out.code_ids.push_back(e.code.id);
  out.w.assign(library.size(), 0.0);
  out.w[index] = 1.0;
  return out;
}

namespace {

void require_weights(const CodeLibrary& library, const MixtureWeights& weights) {
  if (weights.w.size() != library.size()) {
    throw Error(ErrorKind::PreconditionViolation,
                fmt::format("{} weights for a library of {} codes", weights.w.size(), library.size()));
  }
  if (!weights.valid()) throw Error(ErrorKind::PreconditionViolation, "weights are not on the probability simplex");
}

void require_cache(const CodeLibrary& library, const MixtureWeights& weights) {
  for (std::size_t i = 0; i < library.size(); ++i) {
    if (weights.w[i] > 0.0 && library[i].samples.empty()) {
      throw Error(ErrorKind::MissingCache, fmt::format("code {} has no cached samples", library[i].code.id));
    }
  }
}

double norm_of(std::span<const double> w, NormKind kind) {
  double acc = 0.0;
  if (kind == NormKind::L1) {
    for (double x : w) acc += std::abs(x);
    return acc;
  }
  for (double x : w) acc += x * x;
  return std::sqrt(acc);
}

// Euclidean projection onto the probability simplex (sort-based).
void project_simplex(Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  v = (v.array() - theta).max(0.0);
  const double sum = v.sum();
  if (sum > 0.0) v /= sum;
}

// The W1 term on a merged grid t_0 < ... < t_m: sum_k gap_k |C_k w - Q_k|,
// where column i of C is code i's CDF and Q the target CDF.
struct Problem {
  Eigen::MatrixXd cdf;  // (grid points - 1) x codes
  Eigen::VectorXd target;
  Eigen::VectorXd gaps;
  double alpha = 0.0;
  NormKind norm = NormKind::L2;
  double width = 0.0;

  double true_loss(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd r = cdf * w - target;
    return gaps.dot(r.cwiseAbs()) + alpha * norm_of(std::span<const double>(w.data(), w.size()), norm);
  }

  double smooth_loss(const Eigen::VectorXd& w, double mu, Eigen::VectorXd* grad) const {
    const Eigen::VectorXd r = cdf * w - target;
    const Eigen::ArrayXd root = (r.array().square() + mu * mu).sqrt();
    double value = gaps.dot((root - mu).matrix());
    double n = 0.0;
    if (norm == NormKind::L2) {
      n = w.norm();
    } else {
      n = w.cwiseAbs().sum();
    }
    value += alpha * n;
    if (grad != nullptr) {
      const Eigen::VectorXd slope = (gaps.array() * r.array() / root).matrix();
      *grad = cdf.transpose() * slope;
      if (norm == NormKind::L2) {
        if (n > 0.0) *grad += alpha * w / n;
      } else {
        // Constant on the simplex; the projection removes a uniform shift,
        // so only the sign term matters off the boundary.
        *grad += alpha * w.cwiseSign();
      }
    }
    return value;
  }
};

Problem build_problem(const EmpiricalDistribution& target, const CodeLibrary& library,
                      const AlignmentConfig& config) {
  std::vector<EmpiricalDistribution> codes;
  codes.reserve(library.size());
  std::vector<int> grid(target.support());
  for (const LibraryEntry& e : library) {
    if (e.samples.empty()) {
      throw Error(ErrorKind::MissingCache, fmt::format("code {} has no cached samples", e.code.id));
    }
    codes.push_back(EmpiricalDistribution::from_samples(e.samples));
    grid.insert(grid.end(), codes.back().support().begin(), codes.back().support().end());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  Problem p;
  p.alpha = config.alpha;
  p.norm = config.norm;
  const Eigen::Index rows = static_cast<Eigen::Index>(grid.size()) - 1;
  const Eigen::Index cols = static_cast<Eigen::Index>(library.size());
  p.cdf = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(rows, 0), cols);
  p.target = Eigen::VectorXd::Zero(std::max<Eigen::Index>(rows, 0));
  p.gaps = Eigen::VectorXd::Zero(std::max<Eigen::Index>(rows, 0));
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto t = static_cast<std::size_t>(k);
    p.gaps[k] = grid[t + 1] - grid[t];
    p.target[k] = target.cdf(grid[t]);
    for (Eigen::Index i = 0; i < cols; ++i) p.cdf(k, i) = codes[static_cast<std::size_t>(i)].cdf(grid[t]);
  }
  p.width = grid.empty() ? 0.0 : grid.back() - grid.front();
  return p;
}

struct StageResult {
  Eigen::VectorXd x;
  int iterations = 0;
};

// FISTA with backtracking and function-value restart on the smoothed loss.
StageResult minimize_stage(const Problem& p, Eigen::VectorXd x, double mu, double tolerance,
                           int max_iterations, double& lipschitz, Eigen::VectorXd& best,
                           double& best_loss) {
  Eigen::VectorXd y = x;
  Eigen::VectorXd grad;
  double fx = p.smooth_loss(x, mu, nullptr);
  double t = 1.0;
  int quiet = 0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const double fy = p.smooth_loss(y, mu, &grad);
    Eigen::VectorXd z;
    double fz = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      z = y - grad / lipschitz;
      project_simplex(z);
      fz = p.smooth_loss(z, mu, nullptr);
      const Eigen::VectorXd step = z - y;
      if (fz <= fy + grad.dot(step) + 0.5 * lipschitz * step.squaredNorm() + 1e-15) break;
      lipschitz *= 2.0;
    }
    if (fz > fx) {
      // Momentum overshot: restart from the last accepted point.
      y = x;
      t = 1.0;
      if (++quiet >= 10) break;
      continue;
    }
    const double improvement = fx - fz;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = z + ((t - 1.0) / t_next) * (z - x);
    x = std::move(z);
    fx = fz;
    t = t_next;
    lipschitz *= 0.95;

    const double loss = p.true_loss(x);
    if (loss < best_loss) {
      best_loss = loss;
      best = x;
    }
    quiet = improvement < tolerance ? quiet + 1 : 0;
    if (quiet >= 10) break;
  }
  return {std::move(x), it};
}

bool feasible(const Eigen::VectorXd& w) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0 || w[i] > 1.0) return false;
    sum += w[i];
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

}  // namespace

EmpiricalDistribution estimate_distribution(const CodeLibrary& library, const MixtureWeights& weights) {
  require_weights(library, weights);
  require_cache(library, weights);
  std::map<int, double> mass;
  for (std::size_t i = 0; i < library.size(); ++i) {
    if (weights.w[i] <= 0.0) continue;
    const double share = weights.w[i] / static_cast<double>(library[i].samples.size());
    for (int v : library[i].samples) mass[v] += share;
  }
  std::vector<std::pair<int, double>> pairs(mass.begin(), mass.end());
  return EmpiricalDistribution::from_counts(pairs);
}

double alignment_loss(const CodeLibrary& library, const MixtureWeights& weights,
                      const EmpiricalDistribution& target, const AlignmentConfig& config) {
  return wasserstein(estimate_distribution(library, weights), target) +
         config.alpha * norm_of(weights.w, config.norm);
}

AlignmentResult align(const EmpiricalDistribution& target, const CodeLibrary& library,
                      const AlignmentConfig& config) {
  if (library.empty()) throw Error(ErrorKind::PreconditionViolation, "alignment needs a non-empty library");
  if (target.empty()) throw Error(ErrorKind::EmptyDistribution, "alignment target is empty");
  if (!(config.alpha >= 0.0) || !(config.tolerance > 0.0) || config.max_restarts < 1) {
    throw Error(ErrorKind::PreconditionViolation, "alignment config out of range");
  }
  const Problem problem = build_problem(target, library, config);
  const auto n = static_cast<Eigen::Index>(library.size());
  const double mu_floor = std::max(1e-9, config.tolerance / std::max(problem.width, 1.0));

  int total_iterations = 0;
  for (int attempt = 1; attempt <= config.max_restarts; ++attempt) {
    util::Rng rng(util::mix(config.rng_seed, static_cast<std::uint64_t>(attempt)));
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform();
    const double s = x.sum();
    if (s > 0.0) {
      x /= s;
    } else {
      x.setConstant(1.0 / static_cast<double>(n));
    }

    Eigen::VectorXd best = x;
    double best_loss = problem.true_loss(x);
    double lipschitz = 1.0;
    for (double mu = 0.1;; mu *= 0.1) {
      const double stage_mu = std::max(mu, mu_floor);
      StageResult stage = minimize_stage(problem, x, stage_mu, config.tolerance, config.max_iterations,
                                         lipschitz, best, best_loss);
      total_iterations += stage.iterations;
      x = std::move(stage.x);
      if (stage_mu <= mu_floor) break;
    }
    // Never return something worse than a vertex or the uniform mixture.
    Eigen::VectorXd candidate = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    if (const double loss = problem.true_loss(candidate); loss < best_loss) {
      best_loss = loss;
      best = candidate;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      candidate.setZero();
      candidate[i] = 1.0;
      if (const double loss = problem.true_loss(candidate); loss < best_loss) {
        best_loss = loss;
        best = candidate;
      }
    }
    // Clear projection round-off below double precision.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (best[i] < 1e-15) best[i] = 0.0;
    }
    if (best.sum() > 0.0) best /= best.sum();
    if (!feasible(best)) continue;

    AlignmentResult result;
    for (const LibraryEntry& e : library) result.weights.code_ids.push_back(e.code.id);
    result.weights.w.assign(best.data(), best.data() + best.size());
    result.wasserstein = wasserstein(estimate_distribution(library, result.weights), target);
    result.norm = norm_of(result.weights.w, config.norm);
    result.loss = result.wasserstein + config.alpha * result.norm;
    result.attempts = attempt;
    result.iterations = total_iterations;
    return result;
  }
  throw Error(ErrorKind::NoFeasibleSolution,
              fmt::format("no valid weight vector after {} attempts", config.max_restarts));
}

namespace {

std::size_t draw_code(util::Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  auto index = static_cast<std::size_t>(it - cumulative.begin());
  if (index >= cumulative.size()) index = cumulative.size() - 1;
  // Skip zero-weight codes that share a cumulative value with their neighbor.
  while (index > 0 && cumulative[index] == cumulative[index - 1]) --index;
  return index;
}

std::vector<double> cumulative_weights(const MixtureWeights& weights) {
  std::vector<double> c(weights.w.size());
  std::partial_sum(weights.w.begin(), weights.w.end(), c.begin());
  return c;
}

}  // namespace

std::vector<int> sample_mixture(const CodeLibrary& library, const MixtureWeights& weights, std::size_t n,
                                std::uint64_t seed) {
  require_weights(library, weights);
  require_cache(library, weights);
  const std::vector<double> cumulative = cumulative_weights(weights);
  util::Rng rng(seed);
  std::vector<int> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::vector<int>& s = library[draw_code(rng, cumulative)].samples;
    out.push_back(s[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(s.size()) - 1))]);
  }
  return out;
}

std::vector<int> sample_mixture_live(ChatBackend& backend, const GameScenario& game, const CodeLibrary& library,
                                     const MixtureWeights& weights, std::size_t n, std::uint64_t seed,
                                     const ElicitationOptions& options) {
  require_weights(library, weights);
  const std::vector<double> cumulative = cumulative_weights(weights);
  util::Rng rng(seed);
  std::vector<std::size_t> picks(n);
  for (std::size_t k = 0; k < n; ++k) picks[k] = draw_code(rng, cumulative);
  std::vector<int> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ElicitationOptions draw = options;
    draw.nonce_salt = util::mix(options.nonce_salt, seed, k);
    const LibraryEntry& entry = library[picks[k]];
    const SampleSet s = collect_samples(backend, game, entry.code.id, entry.code.text, 1, draw);
    out.insert(out.end(), s.values.begin(), s.values.end());
  }
  return out;
}

EvaluationReport evaluate_samples(std::span<const int> samples, const EmpiricalDistribution& target,
                                  int bin_width) {
  if (samples.empty()) throw Error(ErrorKind::EmptySample, "no elicited samples to evaluate");
  EvaluationReport report;
  report.elicited = EmpiricalDistribution::from_samples(samples);
  report.sample_count = samples.size();
  report.bin_width = bin_width;
  report.wasserstein = wasserstein(report.elicited, target);
  report.ks = ks_test(report.elicited, target);
  report.relaxed = relaxed_ks(report.elicited, target, bin_width);
  return report;
}

EvaluationReport evaluate_mixture(ChatBackend& backend, const GameScenario& game, const CodeLibrary& library,
                                  const MixtureWeights& weights, const EmpiricalDistribution& target,
                                  const AlignmentConfig& config, int bin_width,
                                  const ElicitationOptions& options) {
  const std::vector<int> samples =
      sample_mixture_live(backend, game, library, weights, static_cast<std::size_t>(config.eval_samples),
                          util::mix(config.rng_seed, 0xE7A1ULL), options);
  return evaluate_samples(samples, target, bin_width);
}

EvaluationReport transfer_evaluate(ChatBackend& backend, const CodeLibrary& source, const MixtureWeights& weights,
                                   const GameScenario& target_game, const EmpiricalDistribution& target_dist,
                                   const AlignmentConfig& config, int bin_width,
                                   const ElicitationOptions& options) {
  return evaluate_mixture(backend, target_game, source, weights, target_dist, config, bin_width, options);
}

}  // namespace behavior_codec
