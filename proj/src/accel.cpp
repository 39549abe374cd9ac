#include "circflow/accel.hpp"

#include <cmath>
#include <spdlog/spdlog.h>

#include "circflow/errors.hpp"

namespace circflow {

namespace {

using LD = long double;

// Solves w+ (1 + e^u) - w- (1 + e^-u) = target for u = log(f / (1 - f)); the left side is
// w+/(1-f) - w-/f and increases with u.
LD solveLogOdds(LD wPlus, LD wMinus, LD target, LD u0) {
  auto g = [&](LD u) { return wPlus * (1 + std::exp(u)) - wMinus * (1 + std::exp(-u)) - target; };
  LD lo = u0, hi = u0, step = 1;
  while (g(lo) > 0) {
    lo -= step;
    step *= 2;
  }
  step = 1;
  while (g(hi) < 0) {
    hi += step;
    step *= 2;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-18L * (1 + std::fabs(lo)); ++it) {
    LD mid = 0.5L * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

void checkpointAccel(const FlowState& s, const PerturbedDemand& d, AccelDiagnostics* diag,
                     bool full) {
  if (!diag) return;
  diag->maxWeightSum = std::max(diag->maxWeightSum, s.weightSum());
  diag->maxLedgerError = std::max(diag->maxLedgerError, d.ledgerError(s));
  if (!full) return;
  diag->maxGapDeviation = std::max(diag->maxGapDeviation, dualityGap(s).relativeDeviation);
  diag->maxCentralityError = std::max(diag->maxCentralityError, centralityError(s));
}

}  // namespace

const char* methodName(AccelMethod m) { return m == AccelMethod::Eleven8 ? "eleven8" : "four3"; }

PerturbedDemand PerturbedDemand::of(const Problem& p) {
  PerturbedDemand d;
  d.original.resize(p.n);
  for (int v = 0; v < p.n; ++v) d.original[v] = static_cast<double>(p.demand[v]);
  d.current = d.original;
  return d;
}

double PerturbedDemand::ledgerError(const FlowState& s) const {
  if (current.size() == 0) return 0.0;
  return (divergenceOf(s.graph, s.flow()) - current).cwiseAbs().maxCoeff();
}

BalanceResult balanceWeights(FlowState& state, double delta) {
  BalanceResult res;
  const int m = state.m();
  res.flowDelta = Eigen::VectorXd::Zero(m);
  const double normW = state.weightSum();
  const double floorW = 96 * std::pow(delta, 4) * normW * normW;
  for (int e = 0; e < m; ++e) {
    if (isBalanced(state.wPlus[e], state.wMinus[e], delta, normW)) continue;
    const LD sp = state.sPlus[e], sm = state.sMinus[e];
    const LD target = state.wPlus[e] / sp - state.wMinus[e] / sm;
    double& low = state.wPlus[e] < state.wMinus[e] ? state.wPlus[e] : state.wMinus[e];
    res.weightIncrease += floorW - low;
    low = floorW;
    const LD u = solveLogOdds(state.wPlus[e], state.wMinus[e], target, std::log(sm / sp));
    const double f0 = state.sMinus[e];
    state.sMinus[e] = static_cast<double>(1 / (1 + std::exp(-u)));
    state.sPlus[e] = static_cast<double>(1 / (1 + std::exp(u)));
    res.flowDelta[e] = state.sMinus[e] - f0;
    ++res.rebalanced;
  }
  res.demandDelta = divergenceOf(state.graph, res.flowDelta);
  return res;
}

PerturbedCorrectionResult perturbedCorrection(FlowState& state, const StepSolution& step, double delta) {
  if (step.rhoInf() > 0.5)
    throw StepInfeasible("perturbed correction needs congestion <= 1/2, got " + std::to_string(step.rhoInf()));
  PerturbedCorrectionResult res;
  const double normW = state.weightSum();
  const double cInf = 1.0 / (2 * delta * std::sqrt(2 * normW));
  state.push(step.flow);
  state.mu /= 1 + delta;
  for (int e = 0; e < state.m(); ++e) {
    const double rp = step.rhoPlus[e], rm = step.rhoMinus[e];
    const double wp = state.wPlus[e], wm = state.wMinus[e];
    if (std::fabs(rm) >= cInf) {
      const double add = state.sPlus[e] / state.sMinus[e] * wm * rm * rm;
      state.wPlus[e] += add;
      res.weightIncrease += add;
      ++res.congestedArcs;
    }
    if (std::fabs(rp) >= cInf) {
      const double add = state.sMinus[e] / state.sPlus[e] * wp * rp * rp;
      state.wMinus[e] += add;
      res.weightIncrease += add;
      ++res.congestedArcs;
    }
  }
  const double gamma = delta * delta * normW * 32 * std::sqrt(6.0) * std::log(normW);
  const double bound = 192 * std::sqrt(2.0) * gamma * std::pow(delta * delta * normW, 1.5);
  if (res.weightIncrease > bound * (1 + 1e-9))
    throw ContractViolation("congested-arc reweighting added " + std::to_string(res.weightIncrease) +
                            ", above its bound " + std::to_string(bound));
  res.energy = residualEnergy(state, &step.deltaH);
  if (res.energy > 0.25)
    throw StepInfeasible("perturbed correction left residual energy " + std::to_string(res.energy));
  return res;
}

double absorbResidualIntoWeights(FlowState& state, const Eigen::VectorXd& dh) {
  double added = 0;
  for (int e = 0; e < state.m(); ++e) {
    if (dh[e] < 0) {
      const double a = -state.sPlus[e] * dh[e];
      state.wPlus[e] += a;
      added += a;
    } else if (dh[e] > 0) {
      const double a = state.sMinus[e] * dh[e];
      state.wMinus[e] += a;
      added += a;
    }
  }
  if (added > dh.lpNorm<1>() * (1 + 1e-12))
    throw ContractViolation("absorbing the residual raised weights beyond |dh|_1");
  return added;
}

double scheduledDelta(AccelMethod method, int m, double normW1, double deltaScale, bool strict,
                      bool* belowLowerBound) {
  const double logm = std::max(std::log(static_cast<double>(std::max(m, 1))), 1.0);
  const double base = method == AccelMethod::Eleven8 ? std::pow(m, -3.0 / 8) : std::pow(m, -1.0 / 3);
  double delta = deltaScale * base / (10 * logm);
  delta = std::min(delta, std::pow(normW1, -0.25) / 2);
  const double lower = (method == AccelMethod::Eleven8 ? 1.0 : 10.0) / std::sqrt(normW1);
  const bool below = delta <= lower;
  if (below && strict)
    throw ConfigError(std::string(methodName(method)) + ": delta " + std::to_string(delta) +
                      " is not above the lower bound " + std::to_string(lower) +
                      " (no admissible delta at this size)");
  if (belowLowerBound) *belowLowerBound = below;
  return delta;
}

namespace {

struct Prepared {
  BalanceResult bal;
  StarGraph star;
  RegParams prm;
};

Prepared prepare(FlowState& state, PerturbedDemand& demand, double delta, const AccelOptions& opts) {
  Prepared p;
  p.bal = balanceWeights(state, delta);
  demand.current += p.bal.demandDelta;
  p.star = buildStarGraph(state.graph, state.wPlus, state.wMinus);
  p.prm = chooseParams(state.weightSum(), state.m(), delta, opts.kappa);
  return p;
}

void finishStep(FlowState& state, PerturbedDemand& demand, const StepSolution& step,
                const AccelOptions& opts, IpmMonitor* mon, AccelStepRecord& rec) {
  Eigen::VectorXd shift = step.deltaH;
  const double w0 = state.weightSum();
  CorrectionResult cr = correctToCentral(state, &shift, opts.correction, mon);
  rec.dwPerfect = state.weightSum() - w0;
  rec.correctionSteps = cr.steps;
  rec.dwAbsorb = absorbResidualIntoWeights(state, shift);
  demand.current += step.demand;
}

void fillStepRecord(AccelStepRecord& rec, const Prepared& p, const StepSolution& step) {
  rec.rhoInf = step.rhoInf();
  rec.congestion = step.congestion;
  rec.demandStep = step.demandL1();
  rec.demandBalance = p.bal.demandChange();
  rec.deltaHL1 = step.deltaHL1();
  rec.deltaHBound = step.deltaHBound;
  rec.dwBalance = p.bal.weightIncrease;
  rec.balancedArcs = p.bal.rebalanced;
  rec.solverIterations = step.iterations;
  rec.solverConverged = step.converged;
  rec.alphaMin = step.alphaMin;
  rec.alphaMax = step.alphaMax;
}

}  // namespace

AccelStepRecord progressStep1138(FlowState& state, PerturbedDemand& demand, double delta,
                                 const AccelOptions& opts, IpmMonitor* mon) {
  AccelStepRecord rec;
  rec.delta = delta;
  if (state.m() == 0) return rec;
  Prepared p = prepare(state, demand, delta, opts);
  const Eigen::VectorXd h = computeResidual(state, delta);
  StepSolution step = solveRegularizedStep(state, p.star, h, p.prm, opts.step);
  fillStepRecord(rec, p, step);
  PerturbedCorrectionResult pc = perturbedCorrection(state, step, delta);
  rec.dwCongestion = pc.weightIncrease;
  finishStep(state, demand, step, opts, mon, rec);
  return rec;
}

AccelStepRecord progressStep43(FlowState& state, PerturbedDemand& demand, double delta,
                               const AccelOptions& opts, IpmMonitor* mon) {
  AccelStepRecord rec;
  rec.delta = delta;
  if (state.m() == 0) return rec;
  Prepared p = prepare(state, demand, delta, opts);
  StepSolution step = solveBarrierStep(state, p.star, delta, p.prm, opts.step);
  fillStepRecord(rec, p, step);
  state.push(step.flow);
  state.mu /= 1 + delta;
  if (state.minSlack() <= 0) throw StepInfeasible("barrier step left the box");
  finishStep(state, demand, step, opts, mon, rec);
  return rec;
}

AccelStats accelSolve(FlowState& state, PerturbedDemand& demand, double eps, const AccelOptions& opts,
                      AccelDiagnostics* diag, IpmMonitor* mon) {
  AccelStats st;
  if (state.m() == 0) return st;
  const double budget = 3.0 * state.m();
  checkpointAccel(state, demand, diag, opts.checkpoints);
  bool warned = false;
  while (state.mu * state.weightSum() > eps) {
    if (st.iterations >= opts.maxIterations)
      throw SolverFailure(std::string(methodName(opts.method)) + " iteration cap reached",
                          state.mu * state.weightSum());
    bool below = false;
    double delta = scheduledDelta(opts.method, state.m(), state.weightSum(), opts.deltaScale,
                                  opts.strictDelta, &below);
    if (below && !warned) {
      spdlog::warn("{}: delta {:.3g} is below the congestion lower bound at |w|_1 = {:.1f}",
                   methodName(opts.method), delta, state.weightSum());
      warned = true;
    }
    const Eigen::VectorXd wPlus0 = state.wPlus, wMinus0 = state.wMinus;
    AccelStepRecord rec;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      FlowState trial = state;
      PerturbedDemand td = demand;
      try {
        rec = opts.method == AccelMethod::Eleven8 ? progressStep1138(trial, td, delta, opts, mon)
                                                  : progressStep43(trial, td, delta, opts, mon);
      } catch (const StepInfeasible& e) {
        if (attempt == 1) throw SolverFailure(std::string("step rejected twice: ") + e.what(), delta);
        spdlog::debug("step rejected at delta {:.3g}: {}", delta, e.what());
      } catch (const NumericalFailure& e) {
        if (attempt == 1) throw SolverFailure(std::string("step rejected twice: ") + e.what(), delta);
        spdlog::debug("step rejected at delta {:.3g}: {}", delta, e.what());
      }
      if (rec.delta > 0) {
        rec.retried = attempt > 0;
        state = std::move(trial);
        demand = std::move(td);
        accepted = true;
      } else {
        delta *= 0.5;
        if (diag) ++diag->retries;
      }
    }
    ++st.iterations;
    if (diag) {
      if (below) diag->deltaBelowLowerBound = true;
      diag->minDelta = diag->steps.empty() ? rec.delta : std::min(diag->minDelta, rec.delta);
      diag->balancingEvents += rec.balancedArcs;
      diag->maxStepDemand = std::max(diag->maxStepDemand, rec.demandStep);
      diag->maxRho = std::max(diag->maxRho, rec.rhoInf);
      if (opts.method == AccelMethod::Four3) diag->maxCongestion = std::max(diag->maxCongestion, rec.congestion);
      if ((state.wPlus.array() < wPlus0.array()).any() || (state.wMinus.array() < wMinus0.array()).any())
        diag->weightsMonotone = false;
      diag->steps.push_back(rec);
    }
    checkpointAccel(state, demand, diag, opts.checkpoints);
    if (mon) {
      mon->maxWeightSum = std::max(mon->maxWeightSum, state.weightSum());
      if (opts.checkpoints) mon->checkpoint(state);
    }
    if (opts.enforceWeightBudget && state.weightSum() > budget)
      throw SolverFailure("weight budget 3m exceeded; delta too large for this size", state.weightSum());
  }
  st.finalGap = state.mu * state.weightSum();
  return st;
}

nlohmann::json AccelDiagnostics::toJson(bool perStep) const {
  nlohmann::json j;
  j["iterations"] = steps.size();
  j["balancing_events"] = balancingEvents;
  j["retries"] = retries;
  j["max_weight_sum"] = maxWeightSum;
  j["weights_monotone"] = weightsMonotone;
  j["max_ledger_error"] = maxLedgerError;
  j["max_gap_deviation"] = maxGapDeviation;
  j["max_centrality_error"] = maxCentralityError;
  j["max_step_demand"] = maxStepDemand;
  j["max_rho"] = maxRho;
  j["max_congestion"] = maxCongestion;
  j["min_delta"] = minDelta;
  j["delta_below_lower_bound"] = deltaBelowLowerBound;
  double dw[4] = {0, 0, 0, 0}, demand = 0;
  for (const auto& s : steps) {
    dw[0] += s.dwBalance;
    dw[1] += s.dwCongestion;
    dw[2] += s.dwAbsorb;
    dw[3] += s.dwPerfect;
    demand += s.demandStep + s.demandBalance;
  }
  j["weight_increase"] = {{"balancing", dw[0]}, {"congestion", dw[1]}, {"absorb", dw[2]}, {"perfect", dw[3]}};
  j["demand_perturbation"] = demand;
  if (perStep) {
    auto& arr = j["steps"] = nlohmann::json::array();
    for (const auto& s : steps) {
      arr.push_back({{"delta", s.delta},
                     {"rho", s.rhoInf},
                     {"congestion", s.congestion},
                     {"demand", s.demandStep},
                     {"demand_balance", s.demandBalance},
                     {"dh_l1", s.deltaHL1},
                     {"dw", {s.dwBalance, s.dwCongestion, s.dwAbsorb, s.dwPerfect}},
                     {"correction_steps", s.correctionSteps},
                     {"solver_iterations", s.solverIterations},
                     {"retried", s.retried}});
    }
  }
  return j;
}

}  // namespace circflow
