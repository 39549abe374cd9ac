#include "circflow/graph.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "circflow/errors.hpp"

namespace circflow {

long long Problem::maxAbsCost() const {
  long long c = 0;
  for (const auto& a : arcs) c = std::max(c, std::llabs(a.cost));
  return c;
}

Digraph Digraph::of(const Problem& p) {
  Digraph g;
  g.n = p.n;
  g.tail.reserve(p.arcs.size());
  g.head.reserve(p.arcs.size());
  for (const auto& a : p.arcs) {
    g.tail.push_back(a.tail);
    g.head.push_back(a.head);
  }
  return g;
}

Eigen::VectorXd gradientOf(const Digraph& g, const Eigen::VectorXd& phi) {
  Eigen::VectorXd out(g.m());
  for (int e = 0; e < g.m(); ++e) out[e] = phi[g.head[e]] - phi[g.tail[e]];
  return out;
}

Eigen::VectorXd divergenceOf(const Digraph& g, const Eigen::VectorXd& x) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.n);
  for (int e = 0; e < g.m(); ++e) {
    d[g.head[e]] += x[e];
    d[g.tail[e]] -= x[e];
  }
  return d;
}

std::vector<long long> divergenceOf(const Problem& p, const std::vector<int>& flow) {
  std::vector<long long> d(p.n, 0);
  for (int e = 0; e < p.m(); ++e) {
    d[p.arcs[e].head] += flow[e];
    d[p.arcs[e].tail] -= flow[e];
  }
  return d;
}

bool isConnected(int n, const std::vector<int>& tail, const std::vector<int>& head) {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int comps = n;
  for (std::size_t e = 0; e < tail.size(); ++e) {
    int a = find(tail[e]), b = find(head[e]);
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return comps == 1;
}

void validate(const Problem& p, long long maxCost) {
  if (p.n < 0) throw ValidationError("negative vertex count");
  if (static_cast<int>(p.demand.size()) != p.n)
    throw ValidationError("demand vector has " + std::to_string(p.demand.size()) +
                          " entries, expected " + std::to_string(p.n));
  for (int e = 0; e < p.m(); ++e) {
    const Arc& a = p.arcs[e];
    if (a.tail < 0 || a.tail >= p.n || a.head < 0 || a.head >= p.n)
      throw ValidationError("arc " + std::to_string(e) + " has an endpoint out of range");
    if (a.tail == a.head)
      throw ValidationError("arc " + std::to_string(e) + " is a self-loop");
    if (maxCost >= 0 && std::llabs(a.cost) > maxCost)
      throw ValidationError("arc " + std::to_string(e) + " cost exceeds declared bound");
  }
  long long sum = std::accumulate(p.demand.begin(), p.demand.end(), 0LL);
  if (sum != 0) throw ValidationError("demands sum to " + std::to_string(sum) + ", not 0");
}

void validateForSolve(const Problem& p) {
  validate(p);
  Digraph g = Digraph::of(p);
  if (!isConnected(g.n, g.tail, g.head))
    throw ValidationError("graph is not connected (ignoring orientation)");
}

Problem parseDimacs(std::string_view text) {
  Problem p;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  bool haveHeader = false;
  long long declaredArcs = 0;
  std::vector<long long> supply;
  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == 'c') continue;
    if (tag == "p") {
      std::string kind;
      long long n = 0, m = 0;
      if (haveHeader) throw ParseError(lineNo, "duplicate problem line");
      if (!(ls >> kind >> n >> m) || kind != "min" || n < 0 || m < 0)
        throw ParseError(lineNo, "expected 'p min <n> <m>'");
      haveHeader = true;
      p.n = static_cast<int>(n);
      declaredArcs = m;
      supply.assign(p.n, 0);
      p.arcs.reserve(m);
    } else if (tag == "n") {
      if (!haveHeader) throw ParseError(lineNo, "node line before problem line");
      long long id = 0, s = 0;
      if (!(ls >> id >> s)) throw ParseError(lineNo, "expected 'n <id> <supply>'");
      if (id < 1 || id > p.n) throw ParseError(lineNo, "node id out of range");
      supply[id - 1] += s;
    } else if (tag == "a") {
      if (!haveHeader) throw ParseError(lineNo, "arc line before problem line");
      long long t = 0, h = 0, low = 0, cap = 0, cost = 0;
      if (!(ls >> t >> h >> low >> cap >> cost))
        throw ParseError(lineNo, "expected 'a <tail> <head> <low> <cap> <cost>'");
      if (t < 1 || t > p.n || h < 1 || h > p.n) throw ParseError(lineNo, "arc endpoint out of range");
      if (low != 0 || cap != 1) throw UnsupportedCapacityError(lineNo, low != 0 ? low : cap);
      p.arcs.push_back({static_cast<int>(t - 1), static_cast<int>(h - 1), cost});
    } else {
      throw ParseError(lineNo, "unknown line type '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) throw ParseError(lineNo, "trailing tokens");
  }
  if (!haveHeader) throw ParseError(lineNo, "missing problem line");
  if (static_cast<long long>(p.arcs.size()) != declaredArcs)
    throw ParseError(lineNo, "declared " + std::to_string(declaredArcs) + " arcs, found " +
                                 std::to_string(p.arcs.size()));
  // DIMACS supplies are outflow-positive.
  p.demand.resize(p.n);
  for (int v = 0; v < p.n; ++v) p.demand[v] = -supply[v];
  validate(p);
  return p;
}

std::string writeDimacs(const Problem& p) {
  std::ostringstream out;
  out << "p min " << p.n << ' ' << p.m() << '\n';
  for (int v = 0; v < p.n; ++v)
    if (p.demand[v] != 0) out << "n " << v + 1 << ' ' << -p.demand[v] << '\n';
  for (const auto& a : p.arcs)
    out << "a " << a.tail + 1 << ' ' << a.head + 1 << " 0 1 " << a.cost << '\n';
  return out.str();
}

nlohmann::json toJson(const Problem& p) {
  nlohmann::json arcs = nlohmann::json::array();
  for (const auto& a : p.arcs) arcs.push_back({a.tail, a.head, a.cost});
  return {{"n", p.n}, {"arcs", arcs}, {"demand", p.demand}};
}

Problem problemFromJson(const nlohmann::json& j) {
  Problem p;
  p.n = j.at("n").get<int>();
  for (const auto& a : j.at("arcs"))
    p.arcs.push_back({a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<long long>()});
  p.demand = j.at("demand").get<std::vector<long long>>();
  validate(p);
  return p;
}

AugmentedProblem augmentForInit(const Problem& p) {
  validate(p);
  AugmentedProblem ap;
  ap.base = p;
  ap.combined = p;
  ap.auxiliary.assign(p.m(), 0);
  ap.cInf = (static_cast<long long>(p.m()) + 1) * std::max<long long>(p.maxAbsCost(), 1);

  std::vector<long long> in(p.n, 0), out(p.n, 0);
  for (const auto& a : p.arcs) {
    ++out[a.tail];
    ++in[a.head];
  }
  // Twice the inflow the all-halves flow is missing at v.
  std::vector<long long> twiceL(p.n);
  bool any = false;
  for (int v = 0; v < p.n; ++v) {
    twiceL[v] = 2 * p.demand[v] - (in[v] - out[v]);
    any |= twiceL[v] != 0;
  }
  if (!any) {
    ap.v0 = -1;
    return ap;
  }
  ap.v0 = p.n;
  ap.combined.n = p.n + 1;
  ap.combined.demand.push_back(0);
  for (int v = 0; v < p.n; ++v) {
    for (long long k = 0; k < std::llabs(twiceL[v]); ++k) {
      if (twiceL[v] > 0)
        ap.combined.arcs.push_back({ap.v0, v, ap.cInf});
      else
        ap.combined.arcs.push_back({v, ap.v0, ap.cInf});
      ap.auxiliary.push_back(1);
    }
  }
  return ap;
}

StarGraph buildStarGraph(const Digraph& g, const Eigen::VectorXd& wPlus,
                         const Eigen::VectorXd& wMinus) {
  StarGraph s;
  s.n = g.n;
  s.center = g.n;
  s.weightedDegree.assign(g.n, 0.0);
  for (int e = 0; e < g.m(); ++e) {
    double w = wPlus[e] + wMinus[e];
    s.weightedDegree[g.tail[e]] += w;
    s.weightedDegree[g.head[e]] += w;
  }
  s.count.resize(g.n);
  for (int v = 0; v < g.n; ++v) {
    s.count[v] = static_cast<long long>(std::ceil(s.weightedDegree[v]));
    s.totalEdges += s.count[v];
  }
  return s;
}

}  // namespace circflow
