#include <doctest.h>

#include <cmath>

#include "behavior_codec/distribution.hpp"
#include "behavior_codec/util.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace behavior_codec;
using test_support::kind_of;

namespace {

EmpiricalDistribution point(int v) { return EmpiricalDistribution::from_samples(std::vector<int>{v}); }

EmpiricalDistribution random_distribution(util::Rng& rng, int atoms, int lo, int hi) {
  std::vector<std::pair<int, double>> counts;
  for (int i = 0; i < atoms; ++i) {
    counts.emplace_back(static_cast<int>(rng.uniform_int(lo, hi)), 0.01 + rng.uniform());
  }
  return EmpiricalDistribution::from_counts(counts);
}

std::vector<oracle::Atom> atoms_of(const EmpiricalDistribution& d) {
  std::vector<oracle::Atom> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back({d.support()[i], d.masses()[i]});
  return out;
}

}  // namespace

TEST_CASE("construction") {
  const auto d = EmpiricalDistribution::from_samples(std::vector<int>{0, 50, 50, 100});
  CHECK(d.support() == std::vector<int>{0, 50, 100});
  CHECK(d.masses() == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(d.observations() == 4.0);
  CHECK(d.mean() == 50.0);
  CHECK(d.cdf(49.9) == 0.25);
  CHECK(d.cdf(50) == 0.75);
  CHECK(d.cdf(-1) == 0.0);
  CHECK(d.cdf(1000) == doctest::Approx(1.0));
  CHECK(d.mass_at(50) == 0.5);
  CHECK(d.mass_at(7) == 0.0);

  const std::vector<std::pair<int, double>> counts{{10, 1}, {0, 3}, {10, 0}, {5, 0}};
  const auto c = EmpiricalDistribution::from_counts(counts);
  CHECK(c.support() == std::vector<int>{0, 10});
  CHECK(c.masses() == std::vector<double>{0.75, 0.25});
  CHECK(c.observations() == 4.0);
}

TEST_CASE("construction guards") {
  CHECK(kind_of([] { (void)EmpiricalDistribution::from_masses({1, 2}, {0.5, 0.4}); }) ==
        ErrorKind::PreconditionViolation);
  CHECK(kind_of([] { (void)EmpiricalDistribution::from_masses({2, 1}, {0.5, 0.5}); }) ==
        ErrorKind::PreconditionViolation);
  CHECK(kind_of([] { (void)EmpiricalDistribution::from_masses({1, 2}, {1.5, -0.5}); }) ==
        ErrorKind::PreconditionViolation);
  const std::vector<std::pair<int, double>> negative{{1, -1}};
  CHECK(kind_of([&] { (void)EmpiricalDistribution::from_counts(negative); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { (void)EmpiricalDistribution().mean(); }) == ErrorKind::EmptyDistribution);
  CHECK(kind_of([] { (void)wasserstein(EmpiricalDistribution(), point(1)); }) == ErrorKind::EmptyDistribution);
  CHECK(kind_of([] { point(101).require_within(ActionSpace{0, 100, 1}); }) == ErrorKind::OffGridValue);
  CHECK_NOTHROW(point(100).require_within(ActionSpace{0, 100, 1}));
}

TEST_CASE("wasserstein examples") {
  CHECK(wasserstein(point(0), point(10)) == 10.0);
  const auto p = EmpiricalDistribution::from_samples(std::vector<int>{3, 7, 7, 20});
  CHECK(wasserstein(p, p) == 0.0);
  const auto u = EmpiricalDistribution::from_samples(std::vector<int>{0, 10});
  CHECK(wasserstein(u, point(5)) == doctest::Approx(5.0));
  CHECK(oracle::transport_cost(atoms_of(u), atoms_of(point(5))) == doctest::Approx(5.0));
}

TEST_CASE("wasserstein agrees with the transport oracle") {
  util::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_distribution(rng, static_cast<int>(rng.uniform_int(1, 8)), 0, 100);
    const auto q = random_distribution(rng, static_cast<int>(rng.uniform_int(1, 8)), 0, 100);
    CHECK(wasserstein(p, q) == doctest::Approx(oracle::transport_cost(atoms_of(p), atoms_of(q))).epsilon(1e-9));
  }
}

TEST_CASE("wasserstein is a metric") {
  util::Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_distribution(rng, 6, 0, 100);
    const auto q = random_distribution(rng, 6, 0, 100);
    const auto r = random_distribution(rng, 6, 0, 100);
    const double pq = wasserstein(p, q);
    CHECK(pq >= 0.0);
    CHECK(pq == doctest::Approx(wasserstein(q, p)).epsilon(1e-12));
    CHECK(wasserstein(p, p) == 0.0);
    CHECK(pq <= wasserstein(p, r) + wasserstein(r, q) + 1e-9);
  }
}

TEST_CASE("translation invariance") {
  util::Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_distribution(rng, 5, 0, 60);
    const auto q = random_distribution(rng, 5, 0, 60);
    const int c = static_cast<int>(rng.uniform_int(-20, 20));
    CHECK(wasserstein(p.shifted(c), q.shifted(c)) == doctest::Approx(wasserstein(p, q)).epsilon(1e-12));
    CHECK(std::abs(wasserstein(p.shifted(c), q) - wasserstein(p, q)) <= std::abs(c) + 1e-9);
    const int a = static_cast<int>(rng.uniform_int(0, 50));
    CHECK(wasserstein(point(a).shifted(c), point(a)) == std::abs(c));
  }
}

TEST_CASE("binning regroups masses") {
  const auto d = EmpiricalDistribution::from_samples(std::vector<int>{42, 43, 47, 48});
  const auto b = d.binned(5);
  CHECK(b.support() == std::vector<int>{40, 45, 50});
  CHECK(b.masses() == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(b.observations() == 4.0);
  CHECK(d.binned(1).support() == d.support());
}
