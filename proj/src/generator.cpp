#include "circflow/generator.hpp"

#include <algorithm>
#include <numeric>

#include "circflow/errors.hpp"

namespace circflow {

Problem randomFeasibleInstance(Rng& rng, int n, int m, long long maxCost, double flowDensity) {
  if (n < 2 || m < n - 1) throw ConfigError("need n >= 2 and m >= n - 1 for a connected instance");
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), rng);
  std::uniform_int_distribution<long long> cost(-maxCost, maxCost);
  std::bernoulli_distribution coin(0.5);

  Problem p;
  p.n = n;
  for (int v = 1; v < n; ++v) {
    int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
    int a = label[u], b = label[v];
    if (coin(rng)) std::swap(a, b);
    p.arcs.push_back({a, b, cost(rng)});
  }
  std::uniform_int_distribution<int> vert(0, n - 1);
  while (p.m() < m) {
    int a = vert(rng), b = vert(rng);
    if (a == b) continue;
    p.arcs.push_back({a, b, cost(rng)});
  }
  std::shuffle(p.arcs.begin(), p.arcs.end(), rng);

  std::bernoulli_distribution use(flowDensity);
  std::vector<int> flow(p.m());
  for (auto& f : flow) f = use(rng) ? 1 : 0;
  p.demand = divergenceOf(p, flow);
  return p;
}

Problem shiftDemand(const Problem& p, Rng& rng, int units) {
  Problem q = p;
  std::uniform_int_distribution<int> vert(0, p.n - 1);
  for (int k = 0; k < units; ++k) {
    int a = vert(rng), b = vert(rng);
    if (a == b) continue;
    ++q.demand[a];
    --q.demand[b];
  }
  return q;
}

Problem makeInfeasible(const Problem& p, Rng& rng) {
  Problem q = p;
  std::vector<long long> in(p.n, 0);
  for (const auto& a : p.arcs) ++in[a.head];
  std::uniform_int_distribution<int> vert(0, p.n - 1);
  int v = vert(rng), u = vert(rng);
  while (u == v) u = vert(rng);
  // v can absorb at most in[v] units.
  long long extra = in[v] + 1 - q.demand[v];
  q.demand[v] += extra;
  q.demand[u] -= extra;
  return q;
}

}  // namespace circflow
