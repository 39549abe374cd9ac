#pragma once

#include <Eigen/Dense>
#include <vector>

#include "circflow/flow_state.hpp"
#include "circflow/mixed.hpp"
#include "circflow/vanilla.hpp"
#include "json.hpp"

namespace circflow {

enum class AccelMethod { Eleven8, Four3 };

const char* methodName(AccelMethod m);

// Demand actually routed by the maintained flow, against the original one.
struct PerturbedDemand {
  Eigen::VectorXd current;
  Eigen::VectorXd original;

  static PerturbedDemand of(const Problem& p);
  double perturbation() const { return (current - original).lpNorm<1>(); }
  // |B^T f - current|_inf
  double ledgerError(const FlowState& s) const;
};

struct BalanceResult {
  int rebalanced = 0;
  double weightIncrease = 0;
  Eigen::VectorXd flowDelta;  // f' - f per arc
  Eigen::VectorXd demandDelta;
  double demandChange() const { return demandDelta.lpNorm<1>(); }
};

// Raises the smaller weight of every unbalanced arc to 96 delta^4 |w|_1^2 and moves its flow so
// that w+/s+ - w-/s- is unchanged (bisection on the log-odds of f).
BalanceResult balanceWeights(FlowState& state, double delta);

struct PerturbedCorrectionResult {
  int congestedArcs = 0;
  double weightIncrease = 0;
  double energy = 0;  // of the residual shifted by Delta h, after the update
};

// f += f~, mu /= 1 + delta, and arcs congested beyond 1/(2 delta sqrt(2|w|_1)) get their opposite
// weight raised. StepInfeasible when the shifted residual energy exceeds 1/4.
PerturbedCorrectionResult perturbedCorrection(FlowState& state, const StepSolution& step, double delta);

// w+ -= s+ min(dh, 0), w- += s- max(dh, 0): the state central for the objective shifted by dh
// becomes central for the unshifted one. Returns the weight increase.
double absorbResidualIntoWeights(FlowState& state, const Eigen::VectorXd& dh);

struct AccelStepRecord {
  double delta = 0;
  double rhoInf = 0;
  double congestion = 0;
  double demandStep = 0;     // |d~|_1
  double demandBalance = 0;  // from balancing
  double deltaHL1 = 0;
  double deltaHBound = 0;
  double dwBalance = 0;
  double dwCongestion = 0;
  double dwAbsorb = 0;
  double dwPerfect = 0;
  int balancedArcs = 0;
  int correctionSteps = 0;
  int solverIterations = 0;
  bool solverConverged = true;
  double alphaMin = 1, alphaMax = 1;
  bool retried = false;
};

struct AccelDiagnostics {
  std::vector<AccelStepRecord> steps;
  int balancingEvents = 0;
  int retries = 0;
  double maxWeightSum = 0;
  bool weightsMonotone = true;
  double maxLedgerError = 0;
  double maxGapDeviation = 0;
  double maxCentralityError = 0;
  double maxStepDemand = 0;
  double maxRho = 0;
  double maxCongestion = 0;  // barrier steps
  double minDelta = 0;
  bool deltaBelowLowerBound = false;

  nlohmann::json toJson(bool perStep = false) const;
};

struct AccelOptions {
  AccelMethod method = AccelMethod::Eleven8;
  double deltaScale = 1.0;
  double kappa = kDefaultKappa;
  // Refuse a delta at or below the lower bound the congestion analysis assumes.
  bool strictDelta = false;
  int maxIterations = 1000000;
  bool checkpoints = true;
  bool enforceWeightBudget = true;
  StepOptions step;
  CorrectionOptions correction;
};

// m^(-3/8) or m^(-1/3), over 10 ln m, times deltaScale; capped at |w|_1^(-1/4)/2.
double scheduledDelta(AccelMethod method, int m, double normW1, double deltaScale = 1.0,
                      bool strict = false, bool* belowLowerBound = nullptr);

AccelStepRecord progressStep1138(FlowState& state, PerturbedDemand& demand, double delta,
                                 const AccelOptions& opts = {}, IpmMonitor* mon = nullptr);
AccelStepRecord progressStep43(FlowState& state, PerturbedDemand& demand, double delta,
                               const AccelOptions& opts = {}, IpmMonitor* mon = nullptr);

struct AccelStats {
  int iterations = 0;
  double finalGap = 0;
};

// Progress steps until mu |w|_1 <= eps. A rejected step is retried once at delta/2.
AccelStats accelSolve(FlowState& state, PerturbedDemand& demand, double eps,
                      const AccelOptions& opts = {}, AccelDiagnostics* diag = nullptr,
                      IpmMonitor* mon = nullptr);

}  // namespace circflow
