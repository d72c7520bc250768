#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <regex>

#include "behavior_codec/svg.hpp"
#include "test_support.hpp"

using namespace behavior_codec;
using test_support::kind_of;

namespace {

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("histograms are deterministic") {
  const auto target = EmpiricalDistribution::from_samples(std::vector<int>{10, 20, 20, 30});
  const auto elicited = EmpiricalDistribution::from_samples(std::vector<int>{20, 25});
  const std::string a = render_histogram(target, elicited, "Dictator");
  CHECK(a == render_histogram(target, elicited, "Dictator"));
  CHECK(a.find("<svg") != std::string::npos);
  CHECK(a.ends_with("</svg>\n"));
  CHECK(count(a, "class=\"target\"") == 3);
  CHECK(count(a, "class=\"elicited\"") == 2);
  CHECK(a.find("Dictator") != std::string::npos);
  CHECK(kind_of([&] { (void)render_histogram(EmpiricalDistribution(), elicited, "x"); }) == ErrorKind::EmptyData);

  const auto dir = test_support::scratch_dir("svg");
  emit_histogram(dir / "h.svg", target, elicited, "Dictator");
  emit_histogram(dir / "h2.svg", target, elicited, "Dictator");
  std::ifstream f1(dir / "h.svg"), f2(dir / "h2.svg");
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(s1 == a);
}

TEST_CASE("heatmap of a 7x7 matrix") {
  const std::vector<std::string> labels{"a", "b", "c", "d", "e", "f", "g"};
  std::vector<std::vector<double>> m(7, std::vector<double>(7));
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) m[i][j] = 1.0 / (1 + std::abs(i - j));
  }
  m[2][3] = m[3][2] = NAN;
  const std::string svg = render_heatmap(labels, m, "similarity");
  CHECK(count(svg, "<rect class=\"cell\"") == 49);
  CHECK(count(svg, "class=\"row-label\"") == 7);
  CHECK(count(svg, "class=\"col-label\"") == 7);
  CHECK(count(svg, ">n/a<") == 2);
  CHECK(svg == render_heatmap(labels, m, "similarity"));
  CHECK(kind_of([&] { (void)render_heatmap({}, {}, "x"); }) == ErrorKind::EmptyData);
  std::vector<std::vector<double>> ragged(7, std::vector<double>(6));
  CHECK(kind_of([&] { (void)render_heatmap(labels, ragged, "x"); }) == ErrorKind::DimensionError);
}

TEST_CASE("bars split by sign") {
  const std::vector<std::string> labels{"generous", "retain", "fair"};
  const std::vector<double> values{3.5, -2.0, 0.5};
  const std::string svg = render_bars(labels, values, "coefficients");
  CHECK(count(svg, "class=\"bar\"") == 3);
  CHECK(count(svg, "#d62728") >= 1);
  CHECK(svg == render_bars(labels, values, "coefficients"));
  CHECK(kind_of([&] { (void)render_bars(labels, std::vector<double>{1.0}, "x"); }) == ErrorKind::DimensionError);
}

TEST_CASE("titles are escaped") {
  const auto d = EmpiricalDistribution::from_samples(std::vector<int>{1});
  const std::string svg = render_histogram(d, d, "a < b & \"c\"");
  CHECK(svg.find("a &lt; b &amp;") != std::string::npos);
}
