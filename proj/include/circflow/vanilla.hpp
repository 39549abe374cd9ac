#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "circflow/electrical.hpp"
#include "circflow/flow_state.hpp"

namespace circflow {

// Optional recorder for per-step quantities; every field is filled only when a monitor is passed.
struct IpmMonitor {
  bool checkpoints = true;  // evaluate gap and centrality at every central checkpoint
  std::vector<std::pair<double, double>> contraction;  // (E, E') for consecutive correction steps
  std::vector<double> predictorEnergies;               // at the full step size only
  std::vector<double> gapDeviations;
  std::vector<double> centralityErrors;
  std::vector<double> perfectRho;  // ||rho||_inf consumed by each perfect correction
  std::vector<double> muRatios;     // mu_before / mu_after per outer iteration
  double maxWeightSum = 0;
  bool weightsMonotone = true;
  int correctionSteps = 0;
  int stalls = 0;

  void checkpoint(const FlowState& s);
};

struct CorrectionOptions {
  double targetEnergy = 1e-20;
  // Stop once the energy is within this factor of the floating-point floor.
  double floorFactor = 100.0;
  int maxSteps = 60;
  LaplacianOptions laplacian;
};

struct CorrectionResult {
  int steps = 0;
  std::vector<double> energies;
  double finalEnergy = 0;
  double rhoInf = 0;  // perfect-correction congestion
  double scale = 1;   // 1 / (1 - rhoInf): factor applied to the weights and to the shift
};

// h = delta (w+/s+ - w-/s-): the residual left at mu / (1 + delta) by a central state.
Eigen::VectorXd computeResidual(const FlowState& state, double delta);

// Weight update that zeroes a small residual exactly:
// w' = w (1 + rho) / (1 - ||rho||_inf), mu' = mu (1 - ||rho||_inf), flow unchanged.
// With a shift the state is central for the shifted objective, and the shift is rescaled.
CorrectionResult perfectCorrection(FlowState& state, Eigen::VectorXd* shift = nullptr);

// Repeated residual corrections until the energy reaches the target (or the numerical
// floor), then one perfect correction. Requires residual energy <= 1/4.
CorrectionResult correctToCentral(FlowState& state, Eigen::VectorXd* shift = nullptr,
                                  const CorrectionOptions& opts = {}, IpmMonitor* mon = nullptr);

// f = 1/2, w = 1, mu = ||c||_2 on the augmented instance, centered.
FlowState initialize(const AugmentedProblem& ap, const CorrectionOptions& opts = {},
                     IpmMonitor* mon = nullptr);
FlowState initializeProblem(std::shared_ptr<const Problem> problem,
                            const CorrectionOptions& opts = {}, IpmMonitor* mon = nullptr);

struct VanillaOptions {
  double deltaScale = 1.0;
  int maxIterations = 1000000;
  int maxHalvings = 30;
  CorrectionOptions correction;
};

struct VanillaStats {
  int iterations = 0;
  int halvings = 0;
  double finalGap = 0;  // mu ||w||_1
};

VanillaStats vanillaSolve(FlowState& state, double eps, const VanillaOptions& opts = {},
                          IpmMonitor* mon = nullptr);

}  // namespace circflow
