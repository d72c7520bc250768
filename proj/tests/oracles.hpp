#pragma once

// Reference implementations used only by tests. Each one computes its value
// by a different route than the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

struct Atom {
  int value = 0;
  double mass = 0.0;
};

/// Optimal transport cost between two discrete distributions with ground
/// cost |x - y|, solved as min-cost flow by successive shortest paths with
/// Bellman-Ford on the residual graph.
inline double transport_cost(const std::vector<Atom>& p, const std::vector<Atom>& q) {
  struct Edge {
    std::size_t to;
    double cap;
    double cost;
    std::size_t rev;
  };
  const std::size_t n = p.size() + q.size() + 2;
  const std::size_t source = n - 2;
  const std::size_t sink = n - 1;
  std::vector<std::vector<Edge>> g(n);
  auto add = [&](std::size_t a, std::size_t b, double cap, double cost) {
    g[a].push_back({b, cap, cost, g[b].size()});
    g[b].push_back({a, 0.0, -cost, g[a].size() - 1});
  };
  for (std::size_t i = 0; i < p.size(); ++i) add(source, i, p[i].mass, 0.0);
  for (std::size_t j = 0; j < q.size(); ++j) add(p.size() + j, sink, q[j].mass, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      add(i, p.size() + j, 2.0, std::abs(static_cast<double>(p[i].value - q[j].value)));
    }
  }

  constexpr double kEps = 1e-15;
  double total = 0.0;
  while (true) {
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::pair<std::size_t, std::size_t>> via(n, {n, 0});
    dist[source] = 0.0;
    for (std::size_t round = 0; round < n; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < n; ++u) {
        if (!std::isfinite(dist[u])) continue;
        for (std::size_t k = 0; k < g[u].size(); ++k) {
          const Edge& e = g[u][k];
          if (e.cap > kEps && dist[u] + e.cost < dist[e.to] - 1e-12) {
            dist[e.to] = dist[u] + e.cost;
            via[e.to] = {u, k};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (!std::isfinite(dist[sink])) break;
    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = via[v].first) {
      push = std::min(push, g[via[v].first][via[v].second].cap);
    }
    for (std::size_t v = sink; v != source; v = via[v].first) {
      Edge& e = g[via[v].first][via[v].second];
      e.cap -= push;
      g[v][e.rev].cap += push;
    }
    total += push * dist[sink];
  }
  return total;
}

/// Expected payoff of opening `opened` boxes out of `boxes`, averaging over
/// every bomb position: the reward is `opened` unless the bomb is among the
/// opened boxes.
inline double bomb_expected(int opened, int boxes = 100) {
  double sum = 0.0;
  for (int bomb = 0; bomb < boxes; ++bomb) sum += bomb < opened ? 0.0 : opened;
  return sum / boxes;
}

/// Public goods with every player receiving `multiplier` times the pooled
/// contributions, computed player by player.
inline std::vector<double> public_goods(const std::vector<int>& contributions,
                                        double endowment = 20.0, double multiplier = 0.5) {
  double pool = 0.0;
  for (int c : contributions) pool += c;
  std::vector<double> out;
  for (int c : contributions) out.push_back(endowment - c + multiplier * pool);
  return out;
}

/// Spearman rho from the textbook 1 - 6 sum d^2 / (n (n^2 - 1)); valid only
/// without ties.
inline double spearman_no_ties(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[idx[i]] = static_cast<double>(i + 1);
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

/// Two-sample KS statistic by evaluating both empirical CDFs at every
/// observed point.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  auto ecdf = [](const std::vector<double>& s, double t) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [t](double v) { return v <= t; })) /
           static_cast<double>(s.size());
  };
  double best = 0.0;
  for (const auto* s : {&a, &b}) {
    for (double t : *s) best = std::max(best, std::abs(ecdf(a, t) - ecdf(b, t)));
  }
  return best;
}

}  // namespace oracle
