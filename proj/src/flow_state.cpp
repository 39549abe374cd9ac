#include "circflow/flow_state.hpp"

#include <cmath>
#include <limits>

#include "circflow/electrical.hpp"

namespace circflow {

double FlowState::minSlack() const {
  if (m() == 0) return 1.0;
  return std::min(sPlus.minCoeff(), sMinus.minCoeff());
}

Eigen::VectorXd FlowState::resistance() const {
  return wPlus.cwiseQuotient(sPlus.cwiseAbs2()) + wMinus.cwiseQuotient(sMinus.cwiseAbs2());
}

Eigen::VectorXd FlowState::barrierGradient() const {
  Eigen::VectorXd a(m());
  for (int e = 0; e < m(); ++e) {
    long double v = static_cast<long double>(wPlus[e]) / sPlus[e] -
                    static_cast<long double>(wMinus[e]) / sMinus[e];
    a[e] = static_cast<double>(v);
  }
  return a;
}

void FlowState::push(const Eigen::VectorXd& x) {
  // Update the smaller slack and derive the other, so s+ + s- = 1 holds to one
  // rounding instead of drifting over many updates.
  for (int e = 0; e < m(); ++e) {
    if (sMinus[e] <= sPlus[e]) {
      sMinus[e] += x[e];
      sPlus[e] = 1.0 - sMinus[e];
    } else {
      sPlus[e] -= x[e];
      sMinus[e] = 1.0 - sPlus[e];
    }
  }
}

long double FlowState::preciseFlow(int e) const {
  return sMinus[e] <= sPlus[e] ? static_cast<long double>(sMinus[e])
                               : 1.0L - static_cast<long double>(sPlus[e]);
}

FlowState makeHalfState(std::shared_ptr<const Problem> problem, double mu) {
  FlowState s;
  s.graph = Digraph::of(*problem);
  s.problem = std::move(problem);
  s.projector = std::make_shared<UnitProjector>(s.graph);
  const int m = s.graph.m();
  s.sPlus = Eigen::VectorXd::Constant(m, 0.5);
  s.sMinus = Eigen::VectorXd::Constant(m, 0.5);
  s.wPlus = Eigen::VectorXd::Ones(m);
  s.wMinus = Eigen::VectorXd::Ones(m);
  s.mu = mu;
  s.pi.assign(s.graph.n, 0.0L);
  return s;
}

LongVector reducedCosts(const FlowState& s) {
  LongVector out(s.m());
  const auto& arcs = s.problem->arcs;
  for (int e = 0; e < s.m(); ++e)
    out[e] = static_cast<long double>(arcs[e].cost) - (s.pi[arcs[e].head] - s.pi[arcs[e].tail]);
  return out;
}

Eigen::VectorXd centralityGradient(const FlowState& s, const Eigen::VectorXd* shift) {
  LongVector cbar = reducedCosts(s);
  const long double mu = s.mu;
  Eigen::VectorXd g(s.m());
  for (int e = 0; e < s.m(); ++e) {
    long double v = static_cast<long double>(s.wPlus[e]) / s.sPlus[e] -
                    static_cast<long double>(s.wMinus[e]) / s.sMinus[e] + cbar[e] / mu;
    if (shift) v -= (*shift)[e];
    g[e] = static_cast<double>(v);
  }
  return g;
}

double centralityError(const FlowState& s) {
  if (s.m() == 0) return 0.0;
  Eigen::VectorXd g = centralityGradient(s);
  Eigen::VectorXd off = s.projector->orthogonalPart(g);
  const auto& arcs = s.problem->arcs;
  long double full = 0;
  for (int e = 0; e < s.m(); ++e) {
    long double v = g[e] + (s.pi[arcs[e].head] - s.pi[arcs[e].tail]) / s.mu;
    full = std::max(full, std::fabs(v));
  }
  if (full == 0) return off.cwiseAbs().maxCoeff() == 0 ? 0.0 : 1.0;
  return static_cast<double>(off.cwiseAbs().maxCoeff() / full);
}

double residualEnergy(const FlowState& s, const Eigen::VectorXd* shift) {
  if (s.m() == 0) return 0.0;
  return correctionFlow(s, -centralityGradient(s, shift)).energy;
}

double residualEnergyFloor(const FlowState& s) {
  constexpr double epsD = std::numeric_limits<double>::epsilon();
  constexpr double epsL = std::numeric_limits<long double>::epsilon();
  const auto& arcs = s.problem->arcs;
  Eigen::VectorXd r = s.resistance();
  double floor = 0;
  for (int e = 0; e < s.m(); ++e) {
    double costScale = std::abs(static_cast<double>(arcs[e].cost)) +
                       std::abs(static_cast<double>(s.pi[arcs[e].head])) +
                       std::abs(static_cast<double>(s.pi[arcs[e].tail]));
    double eta = 4 * epsL * costScale / s.mu + 4 * epsD * (s.wPlus[e] / s.sPlus[e] + s.wMinus[e] / s.sMinus[e]);
    floor += 0.5 * eta * eta / r[e];
  }
  return floor;
}

GapReport dualityGap(const FlowState& s) {
  GapReport g;
  LongVector cbar = reducedCosts(s);
  const long double mu = s.mu;
  long double total = 0, w = 0;
  long double minSlack = std::numeric_limits<long double>::infinity();
  for (int e = 0; e < s.m(); ++e) {
    long double zPlus = mu * s.wPlus[e] / s.sPlus[e];
    long double zMinus = mu * s.wMinus[e] / s.sMinus[e];
    // Dual feasibility needs zMinus - zPlus = cbar exactly. Derive the multiplier on the
    // side with the smaller slack, so the centrality residual enters weighted by that slack.
    if (s.sPlus[e] < s.sMinus[e])
      zPlus = zMinus - cbar[e];
    else
      zMinus = zPlus + cbar[e];
    total += s.preciseFlow(e) * cbar[e] + zPlus;
    w += static_cast<long double>(s.wPlus[e]) + s.wMinus[e];
    minSlack = std::min({minSlack, zPlus, zMinus});
  }
  g.primalMinusDual = total;
  g.muWeight = mu * w;
  g.relativeDeviation =
      g.muWeight > 0 ? static_cast<double>(std::fabs(total - g.muWeight) / g.muWeight) : 0.0;
  g.minDualSlack = s.m() ? static_cast<double>(minSlack) : 0.0;
  return g;
}

void recenterPotentials(FlowState& s) {
  if (s.m() == 0) return;
  Eigen::VectorXd phi = s.projector->potentials(centralityGradient(s));
  for (int v = 0; v < s.n(); ++v) s.pi[v] += static_cast<long double>(s.mu) * phi[v];
}

}  // namespace circflow
