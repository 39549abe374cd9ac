#pragma once

#include <vector>

#include "circflow/flow_state.hpp"
#include "circflow/graph.hpp"
#include "circflow/oracle.hpp"

namespace circflow {

// Bipartite b-matching form of a unit-capacity flow problem. V1 is the vertex set; each arc
// e = (u, v, c) contributes a V2 vertex v_e with edges (u, v_e) of cost c and (v, v_e) of cost 0.
// x[e] is the amount on (u, v_e); (v, v_e) carries 1 - x[e].
struct MatchingInstance {
  Problem problem;
  std::vector<long double> x;
  std::vector<long double> b;        // V1 multiplicities; every V2 vertex has b = 1
  std::vector<long double> yVertex;  // duals on V1
  std::vector<long double> yArc;     // duals on V2

  // sum over edges of x times reduced cost
  long double gap() const;
  // max over edges of y_a + y_b - cost; <= 0 for a feasible dual
  long double maxDualViolation() const;
  // max over V1 of |sum of incident x - b|
  long double maxDegreeViolation() const;
  bool integral() const;
};

// b_v = (in-degree of v) - d_v
std::vector<long long> bFromDemand(const Problem& p, const std::vector<long long>& demand);

// x = f, y on V1 = -pi, y on V2 from the tail side: y_{v_e} = c_e - y_u - mu w-/f. With
// `consistency`, reports the largest relative disagreement with the head-side formula
// y_{v_e} = -y_v - mu w+/(1-f). Raises ContractViolation above 1e-7.
MatchingInstance flowToMatching(const FlowState& state, double* consistency = nullptr);

struct FixResult {
  Status status = Status::Infeasible;
  MatchingInstance matching;  // integral primal and dual when optimal
  int cyclesCancelled = 0;
  int phases = 0;             // augmenting shortest paths
  long long discrepancy = 0;  // |b(rounded x) - bhat|_1
};

// Rounds x, cancels negative residual cycles, then routes the remaining b-discrepancy one unit
// at a time along shortest augmenting paths (ties by vertex index), keeping duals feasible.
FixResult fixMatching(const MatchingInstance& inst, const std::vector<long long>& bhat);

struct FlowCertificate {
  std::vector<int> flow;
  std::vector<long long> zPlus;   // multiplier of f <= 1
  std::vector<long long> zMinus;  // multiplier of f >= 0
  long long cost = 0;
};

// f_e = x_{u, v_e}; z- = c_e - y_u - y_{v_e}, z+ = -y_v - y_{v_e}. Checks z >= 0 and exact
// complementary slackness.
FlowCertificate matchingToFlow(const MatchingInstance& inst);

struct RepairResult {
  Status status = Status::Infeasible;
  std::vector<int> flow;  // on the base arcs
  long long cost = 0;
  int phases = 0;
  int cyclesCancelled = 0;
  long long discrepancy = 0;
  bool auxiliaryUsed = false;
  double matchingGap = 0;  // of the fractional matching built from the state
};

// Exact optimum of the base instance from a near-central state on its augmentation.
RepairResult repair(const AugmentedProblem& ap, const FlowState& state);

}  // namespace circflow
