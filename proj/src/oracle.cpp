#include "circflow/oracle.hpp"

#include <bit>
#include <limits>
#include <queue>

#include "circflow/errors.hpp"

namespace circflow {

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

struct Incidence {
  std::vector<std::vector<int>> arcsAt;  // every arc incident to v
  explicit Incidence(const Problem& p) : arcsAt(p.n) {
    for (int e = 0; e < p.m(); ++e) {
      arcsAt[p.arcs[e].tail].push_back(e);
      arcsAt[p.arcs[e].head].push_back(e);
    }
  }
};

// Residual arc of e leaving v, if any: returns the far endpoint and its cost.
inline bool residualFrom(const Problem& p, const std::vector<int>& flow, int e, int v, int& to,
                         long long& cost) {
  const Arc& a = p.arcs[e];
  if (flow[e] == 0 && a.tail == v) {
    to = a.head;
    cost = a.cost;
    return true;
  }
  if (flow[e] == 1 && a.head == v) {
    to = a.tail;
    cost = -a.cost;
    return true;
  }
  return false;
}

}  // namespace

long long flowCost(const Problem& p, const std::vector<int>& flow) {
  long long c = 0;
  for (int e = 0; e < p.m(); ++e) c += flow[e] * p.arcs[e].cost;
  return c;
}

std::vector<long long> residualPotentials(const Problem& p, const std::vector<int>& flow) {
  // Bellman-Ford from a virtual source joined to every vertex at cost 0.
  std::vector<long long> dist(p.n, 0);
  for (int round = 0; round <= p.n; ++round) {
    bool changed = false;
    for (int e = 0; e < p.m(); ++e) {
      const Arc& a = p.arcs[e];
      int from = flow[e] ? a.head : a.tail;
      int to = flow[e] ? a.tail : a.head;
      long long c = flow[e] ? -a.cost : a.cost;
      if (dist[from] + c < dist[to]) {
        dist[to] = dist[from] + c;
        changed = true;
      }
    }
    if (!changed) return dist;
  }
  return {};
}

bool certifiesOptimal(const Problem& p, const std::vector<int>& flow,
                      const std::vector<long long>& potentials) {
  if (static_cast<int>(flow.size()) != p.m() || static_cast<int>(potentials.size()) != p.n)
    return false;
  for (int f : flow)
    if (f != 0 && f != 1) return false;
  if (divergenceOf(p, flow) != p.demand) return false;
  for (int e = 0; e < p.m(); ++e) {
    const Arc& a = p.arcs[e];
    long long reduced = a.cost + potentials[a.tail] - potentials[a.head];
    if (flow[e] == 0 && reduced < 0) return false;
    if (flow[e] == 1 && reduced > 0) return false;
  }
  return true;
}

int augmentShortestPaths(const Problem& p, std::vector<int>& flow, std::vector<long long>& pot,
                         bool checkDuals) {
  std::vector<long long> div = divergenceOf(p, flow);
  std::vector<long long> need(p.n);
  for (int v = 0; v < p.n; ++v) need[v] = p.demand[v] - div[v];

  auto verifyDuals = [&] {
    for (int e = 0; e < p.m(); ++e) {
      const Arc& a = p.arcs[e];
      long long reduced = a.cost + pot[a.tail] - pot[a.head];
      if ((flow[e] == 0 && reduced < 0) || (flow[e] == 1 && reduced > 0))
        throw ContractViolation("residual arc " + std::to_string(e) + " has negative reduced cost");
    }
  };
  if (checkDuals) verifyDuals();

  Incidence inc(p);
  std::vector<long long> dist(p.n);
  std::vector<int> via(p.n);
  using Item = std::pair<long long, int>;
  int phases = 0;
  while (true) {
    bool pending = false;
    for (int v = 0; v < p.n; ++v) pending |= need[v] < 0;
    if (!pending) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), -1);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int v = 0; v < p.n; ++v)
      if (need[v] < 0) {
        dist[v] = 0;
        pq.push({0, v});
      }
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d != dist[v]) continue;
      for (int e : inc.arcsAt[v]) {
        int to;
        long long c;
        if (!residualFrom(p, flow, e, v, to, c)) continue;
        long long nd = d + c + pot[v] - pot[to];
        if (nd < dist[to]) {
          dist[to] = nd;
          via[to] = e;
          pq.push({nd, to});
        }
      }
    }
    int sink = -1;
    for (int v = 0; v < p.n; ++v)
      if (need[v] > 0 && dist[v] < kInf && (sink < 0 || dist[v] < dist[sink])) sink = v;
    if (sink < 0) return -1;
    long long bound = dist[sink];
    for (int v = 0; v < p.n; ++v) pot[v] += std::min(dist[v], bound);

    int v = sink;
    while (via[v] >= 0) {
      int e = via[v];
      flow[e] ^= 1;
      v = (p.arcs[e].head == v) ? p.arcs[e].tail : p.arcs[e].head;
    }
    ++need[v];
    --need[sink];
    ++phases;
    if (checkDuals) verifyDuals();
  }
  return phases;
}

int cancelNegativeCycles(const Problem& p, std::vector<int>& flow) {
  int cancelled = 0;
  std::vector<long long> dist(p.n);
  std::vector<int> via(p.n);
  for (;;) {
    std::fill(dist.begin(), dist.end(), 0);
    std::fill(via.begin(), via.end(), -1);
    int last = -1;
    for (int round = 0; round < p.n; ++round) {
      last = -1;
      for (int e = 0; e < p.m(); ++e) {
        const Arc& a = p.arcs[e];
        int from = flow[e] ? a.head : a.tail;
        int to = flow[e] ? a.tail : a.head;
        long long c = flow[e] ? -a.cost : a.cost;
        if (dist[from] + c < dist[to]) {
          dist[to] = dist[from] + c;
          via[to] = e;
          last = to;
        }
      }
      if (last < 0) return cancelled;
    }
    // Still relaxing after n rounds: walking back n arcs from `last` lands on a cycle.
    auto back = [&](int to) {
      const Arc& a = p.arcs[via[to]];
      return flow[via[to]] ? a.head : a.tail;
    };
    int v = last;
    for (int i = 0; i < p.n; ++i) v = back(v);
    const int start = v;
    std::vector<int> cycle;
    do {
      cycle.push_back(via[v]);
      v = back(v);
    } while (v != start);
    for (int e : cycle) flow[e] ^= 1;
    ++cancelled;
  }
}

ExactSolution sspSolve(const Problem& p) {
  validate(p);
  ExactSolution sol;
  // Saturating negative arcs leaves a residual graph with non-negative costs.
  std::vector<int> flow(p.m(), 0);
  for (int e = 0; e < p.m(); ++e)
    if (p.arcs[e].cost < 0) flow[e] = 1;

  std::vector<long long> pot = residualPotentials(p, flow);
  if (pot.empty()) throw ContractViolation("initial residual graph has a negative cycle");
  if (augmentShortestPaths(p, flow, pot) < 0) return sol;

  if (!certifiesOptimal(p, flow, pot))
    throw ContractViolation("successive shortest paths produced an uncertified flow");
  sol.status = Status::Optimal;
  sol.flow = std::move(flow);
  sol.cost = flowCost(p, sol.flow);
  sol.potentials = std::move(pot);
  return sol;
}

ExactSolution bruteForceSolve(const Problem& p) {
  validate(p);
  if (p.m() > 20) throw SizeError("brute force limited to m <= 20, got " + std::to_string(p.m()));
  const int m = p.m();
  std::vector<long long> div(p.n, 0);
  int mismatched = 0;
  for (int v = 0; v < p.n; ++v) mismatched += div[v] != p.demand[v];
  auto touch = [&](int v, long long delta) {
    mismatched -= div[v] != p.demand[v];
    div[v] += delta;
    mismatched += div[v] != p.demand[v];
  };

  std::uint32_t code = 0, best = 0;
  long long cost = 0, bestCost = kInf;
  if (mismatched == 0) bestCost = 0;
  for (std::uint32_t i = 1; i < (1u << m); ++i) {
    int e = std::countr_zero(i);
    code ^= 1u << e;
    long long s = (code >> e) & 1u ? 1 : -1;
    touch(p.arcs[e].head, s);
    touch(p.arcs[e].tail, -s);
    cost += s * p.arcs[e].cost;
    if (mismatched == 0 && cost < bestCost) {
      bestCost = cost;
      best = code;
    }
  }
  ExactSolution sol;
  if (bestCost == kInf) return sol;
  sol.status = Status::Optimal;
  sol.cost = bestCost;
  sol.flow.resize(m);
  for (int e = 0; e < m; ++e) sol.flow[e] = (best >> e) & 1u;
  return sol;
}

}  // namespace circflow
