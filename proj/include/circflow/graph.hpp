#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace circflow {

// Vertices are 0-based internally; DIMACS files are 1-based.
struct Arc {
  int tail = 0;
  int head = 0;
  long long cost = 0;
  bool operator==(const Arc&) const = default;
};

// Unit-capacity min-cost flow instance. demand[v] = inflow(v) - outflow(v).
struct Problem {
  int n = 0;
  std::vector<Arc> arcs;
  std::vector<long long> demand;

  int m() const { return static_cast<int>(arcs.size()); }
  long long maxAbsCost() const;
  bool operator==(const Problem&) const = default;
};

// Bare incidence structure shared by the numerical modules.
struct Digraph {
  int n = 0;
  std::vector<int> tail;
  std::vector<int> head;

  int m() const { return static_cast<int>(tail.size()); }
  static Digraph of(const Problem& p);
};

// (B phi)_e = phi[head] - phi[tail]
Eigen::VectorXd gradientOf(const Digraph& g, const Eigen::VectorXd& phi);
// (B^T x)_v = inflow - outflow
Eigen::VectorXd divergenceOf(const Digraph& g, const Eigen::VectorXd& x);
std::vector<long long> divergenceOf(const Problem& p, const std::vector<int>& flow);

bool isConnected(int n, const std::vector<int>& tail, const std::vector<int>& head);

// Checks vertex range, self-loops, balanced demand and |cost| <= maxCost (when maxCost >= 0).
void validate(const Problem& p, long long maxCost = -1);
// validate() plus undirected connectivity.
void validateForSolve(const Problem& p);

Problem parseDimacs(std::string_view text);
std::string writeDimacs(const Problem& p);

nlohmann::json toJson(const Problem& p);
Problem problemFromJson(const nlohmann::json& j);

// Instance plus the high-cost arcs through v0 that make the all-halves flow feasible.
struct AugmentedProblem {
  Problem base;
  Problem combined;             // base arcs first, then auxiliary arcs; v0 = base.n
  std::vector<char> auxiliary;  // per combined arc
  int v0 = 0;
  long long cInf = 0;
};

AugmentedProblem augmentForInit(const Problem& p);

// Star preconditioner: count[v] parallel edges v -> v* with count[v] = ceil(sum of w+ + w- at v).
struct StarGraph {
  int n = 0;       // base vertices; the center is vertex n
  int center = 0;
  std::vector<long long> count;
  std::vector<double> weightedDegree;
  long long totalEdges = 0;
};

StarGraph buildStarGraph(const Digraph& g, const Eigen::VectorXd& wPlus,
                         const Eigen::VectorXd& wMinus);
inline StarGraph buildStarGraph(const Problem& p, const Eigen::VectorXd& wPlus,
                                const Eigen::VectorXd& wMinus) {
  return buildStarGraph(Digraph::of(p), wPlus, wMinus);
}

}  // namespace circflow
