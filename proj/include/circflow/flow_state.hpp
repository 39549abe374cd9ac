#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "circflow/graph.hpp"

namespace circflow {

class UnitProjector;

using LongVector = std::vector<long double>;

// Interior-point iterate. Slacks are stored separately so that an arc close to
// either bound keeps full relative precision on its small slack; the flow is sMinus.
struct FlowState {
  std::shared_ptr<const Problem> problem;
  Digraph graph;
  std::shared_ptr<const UnitProjector> projector;

  Eigen::VectorXd sPlus;   // 1 - f
  Eigen::VectorXd sMinus;  // f
  Eigen::VectorXd wPlus;
  Eigen::VectorXd wMinus;
  double mu = 1.0;
  // Dual potentials in cost units. Reduced costs c - B pi are formed in extended
  // precision, which keeps the centrality residual accurate when c/mu is huge.
  LongVector pi;

  int m() const { return graph.m(); }
  int n() const { return graph.n; }
  const Eigen::VectorXd& flow() const { return sMinus; }
  double weightSum() const { return wPlus.sum() + wMinus.sum(); }
  double minSlack() const;
  // w+/s+^2 + w-/s-^2
  Eigen::VectorXd resistance() const;
  // w+/s+ - w-/s-
  Eigen::VectorXd barrierGradient() const;
  // Moves flow by x: sMinus += x, sPlus -= x.
  void push(const Eigen::VectorXd& x);
  // f_e in extended precision, taken from whichever slack is smaller.
  long double preciseFlow(int e) const;
};

// f = 1/2, w = 1, pi = 0 on the given instance (no centering).
FlowState makeHalfState(std::shared_ptr<const Problem> problem, double mu);

// c_e - (pi[head] - pi[tail]) in extended precision.
LongVector reducedCosts(const FlowState& s);

// w+/s+ - w-/s- + (c - B pi)/mu - shift, in extended precision. The state is
// central for the shifted objective exactly when this lies in Im(B).
Eigen::VectorXd centralityGradient(const FlowState& s, const Eigen::VectorXd* shift = nullptr);

// Relative infinity-norm distance of the full gradient from Im(B), measured with the
// least-squares potential: ||g - B phi||_inf / ||g||_inf.
double centralityError(const FlowState& s);

// Energy needed to correct the current centrality residual (optionally shifted).
double residualEnergy(const FlowState& s, const Eigen::VectorXd* shift = nullptr);

// Rough size of the energy that floating-point evaluation of the residual alone
// produces; corrections below this level cannot make further progress.
double residualEnergyFloor(const FlowState& s);

struct GapReport {
  long double primalMinusDual = 0;  // c^T f - (d^T pi - sum z+), with d = B^T f
  long double muWeight = 0;          // mu * ||w||_1
  double relativeDeviation = 0;      // |primalMinusDual - muWeight| / muWeight
  double minDualSlack = 0;           // min over arcs of z+ and z-
};

// Primal-dual gap of the dual certificate built from the state's potentials and y = mu w / s.
GapReport dualityGap(const FlowState& s);

// Shifts pi by mu times the least-squares fit of the centrality gradient, removing
// its Im(B) component.
void recenterPotentials(FlowState& s);

}  // namespace circflow
