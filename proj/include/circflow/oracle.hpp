#pragma once

#include <vector>

#include "circflow/graph.hpp"

namespace circflow {

enum class Status { Optimal, Infeasible };

struct ExactSolution {
  Status status = Status::Infeasible;
  std::vector<int> flow;
  long long cost = 0;
  // Vertex potentials with c_e + p[tail] - p[head] >= 0 on every residual arc (empty for brute force).
  std::vector<long long> potentials;
};

// Successive shortest paths with Dijkstra on reduced costs.
ExactSolution sspSolve(const Problem& p);

// Exhaustive search over all 0/1 flows; m <= 20.
ExactSolution bruteForceSolve(const Problem& p);

// Reduced-cost certificate: flow routes the demand and no residual arc has negative reduced cost.
bool certifiesOptimal(const Problem& p, const std::vector<int>& flow,
                      const std::vector<long long>& potentials);

long long flowCost(const Problem& p, const std::vector<int>& flow);

// Successive shortest paths starting from a 0/1 flow and potentials with
// c + pot[tail] - pot[head] >= 0 on every residual arc. Each phase routes one unit from the
// nearest vertex with surplus inflow to the nearest one short of its demand (ties by index).
// Returns the number of phases, or -1 when the demand cannot be met.
int augmentShortestPaths(const Problem& p, std::vector<int>& flow, std::vector<long long>& pot,
                         bool checkDuals = false);

// Flips negative-cost residual cycles (found by Bellman-Ford) until none is left.
int cancelNegativeCycles(const Problem& p, std::vector<int>& flow);

// Potentials certifying a given 0/1 flow, or empty when its residual graph has a negative cycle.
std::vector<long long> residualPotentials(const Problem& p, const std::vector<int>& flow);

}  // namespace circflow
