#include "circflow/vanilla.hpp"

#include <cmath>
#include <spdlog/spdlog.h>

#include "circflow/errors.hpp"

namespace circflow {

namespace {

void applyPotentialShift(FlowState& s, const Eigen::VectorXd& phi) {
  for (int v = 0; v < s.n(); ++v) s.pi[v] += static_cast<long double>(s.mu) * phi[v];
}

Correction residualCorrection(const FlowState& s, const Eigen::VectorXd* shift,
                              const LaplacianOptions& lap) {
  return correctionFlow(s, -centralityGradient(s, shift), lap);
}

void checkSlack(const FlowState& s) {
  if (s.minSlack() < 1e-12)
    throw NumericalFailure("slack fell below 1e-12 (min slack " + std::to_string(s.minSlack()) + ")");
}

CorrectionResult applyPerfect(FlowState& s, const Correction& c, Eigen::VectorXd* shift) {
  const double eps = c.energy;
  if (eps > 0.01) throw ContractViolation("perfect correction needs residual energy <= 1/100, got " +
                                          std::to_string(eps));
  CorrectionResult res;
  res.finalEnergy = eps;
  res.rhoInf = c.rhoInf();
  const double k = 1.0 - res.rhoInf;
  res.scale = 1.0 / k;
  const double w0 = s.weightSum();
  const double mu0 = s.mu;
  for (int e = 0; e < s.m(); ++e) {
    s.wPlus[e] = s.wPlus[e] * (1.0 + c.rhoPlus[e]) / k;
    s.wMinus[e] = s.wMinus[e] * (1.0 + c.rhoMinus[e]) / k;
  }
  applyPotentialShift(s, c.phi);
  s.mu = mu0 * k;
  if (shift) *shift /= k;

  const double dw = s.weightSum() - w0;
  const double root = std::sqrt(eps);
  if (dw > 4 * root * w0 + 1e-12 * w0)
    throw ContractViolation("perfect correction raised weights by " + std::to_string(dw));
  if (s.mu > mu0 * (1 + 2 * root))
    throw ContractViolation("perfect correction raised mu beyond 1 + 2 sqrt(eps)");
  return res;
}

}  // namespace

void IpmMonitor::checkpoint(const FlowState& s) {
  maxWeightSum = std::max(maxWeightSum, s.weightSum());
  if (!checkpoints) return;
  gapDeviations.push_back(dualityGap(s).relativeDeviation);
  centralityErrors.push_back(centralityError(s));
}

Eigen::VectorXd computeResidual(const FlowState& state, double delta) {
  return delta * state.barrierGradient();
}

CorrectionResult perfectCorrection(FlowState& state, Eigen::VectorXd* shift) {
  if (state.m() == 0) return {};
  return applyPerfect(state, residualCorrection(state, shift, {}), shift);
}

CorrectionResult correctToCentral(FlowState& state, Eigen::VectorXd* shift,
                                  const CorrectionOptions& opts, IpmMonitor* mon) {
  if (state.m() == 0) return {};
  Correction c = residualCorrection(state, shift, opts.laplacian);
  if (c.energy > 0.25 + 1e-9)
    throw ContractViolation("correctToCentral needs residual energy <= 1/4, got " +
                            std::to_string(c.energy));
  const double target = std::max(opts.targetEnergy, opts.floorFactor * residualEnergyFloor(state));

  std::vector<double> energies{c.energy};
  int violations = 0;
  int steps = 0;
  while (c.energy > target && steps < opts.maxSteps) {
    if (c.rhoInf() >= 1.0) throw NumericalFailure("residual correction would leave the feasible box");
    state.push(c.flow);
    applyPotentialShift(state, c.phi);
    ++steps;
    Correction next = residualCorrection(state, shift, opts.laplacian);
    const double e0 = c.energy, e1 = next.energy;
    energies.push_back(e1);
    if (mon) {
      mon->contraction.emplace_back(e0, e1);
      ++mon->correctionSteps;
    }
    c = std::move(next);
    if (e1 > 2 * e0 * e0 + 1e-12) {
      if (++violations >= 2)
        throw NumericalFailure("residual energy stopped contracting (" + std::to_string(e0) +
                               " -> " + std::to_string(e1) + ")");
    } else {
      violations = 0;
    }
    // Below 1e-12 a step that fails to halve the energy has hit rounding noise.
    if (e1 <= 1e-12 && e1 > 0.5 * e0) {
      if (mon) ++mon->stalls;
      break;
    }
  }
  if (c.energy > 0.01)
    throw NumericalFailure("residual correction did not converge (energy " +
                           std::to_string(c.energy) + ")");
  CorrectionResult res = applyPerfect(state, c, shift);
  res.steps = steps;
  res.energies = std::move(energies);
  if (mon) mon->perfectRho.push_back(res.rhoInf);
  checkSlack(state);
  return res;
}

FlowState initializeProblem(std::shared_ptr<const Problem> problem, const CorrectionOptions& opts,
                            IpmMonitor* mon) {
  double norm = 0;
  for (const auto& a : problem->arcs) norm += static_cast<double>(a.cost) * static_cast<double>(a.cost);
  norm = std::sqrt(norm);
  FlowState s = makeHalfState(std::move(problem), norm > 0 ? norm : 1.0);
  if (norm > 0) correctToCentral(s, nullptr, opts, mon);
  if (mon) mon->checkpoint(s);
  return s;
}

FlowState initialize(const AugmentedProblem& ap, const CorrectionOptions& opts, IpmMonitor* mon) {
  return initializeProblem(std::make_shared<const Problem>(ap.combined), opts, mon);
}

VanillaStats vanillaSolve(FlowState& state, double eps, const VanillaOptions& opts,
                          IpmMonitor* mon) {
  VanillaStats st;
  if (state.m() == 0) return st;
  while (state.mu * state.weightSum() > eps) {
    if (st.iterations >= opts.maxIterations)
      throw SolverFailure("vanilla iteration cap reached", state.mu * state.weightSum());
    const double fullDelta = opts.deltaScale / std::sqrt(2.0 * state.weightSum());
    double delta = fullDelta;
    const double muBefore = state.mu;
    const Eigen::VectorXd wPlus0 = state.wPlus, wMinus0 = state.wMinus;
    bool accepted = false;
    for (int attempt = 0; attempt <= opts.maxHalvings && !accepted; ++attempt) {
      FlowState trial = state;
      trial.mu = state.mu / (1.0 + delta);
      Eigen::VectorXd h = computeResidual(state, delta);
      Correction pred = correctionFlow(trial, h, opts.correction.laplacian);
      if (mon && delta == fullDelta) mon->predictorEnergies.push_back(pred.energy);
      if (pred.rhoInf() > 0.5) {
        delta *= 0.5;
        ++st.halvings;
        continue;
      }
      trial.push(pred.flow);
      applyPotentialShift(trial, pred.phi);
      checkSlack(trial);
      correctToCentral(trial, nullptr, opts.correction, mon);
      state = std::move(trial);
      accepted = true;
    }
    if (!accepted) throw SolverFailure("predictor step kept exceeding congestion 1/2", delta);
    ++st.iterations;
    if (mon) {
      mon->muRatios.push_back(muBefore / state.mu);
      if ((state.wPlus.array() < wPlus0.array()).any() || (state.wMinus.array() < wMinus0.array()).any())
        mon->weightsMonotone = false;
      mon->checkpoint(state);
    }
  }
  st.finalGap = state.mu * state.weightSum();
  return st;
}

}  // namespace circflow
