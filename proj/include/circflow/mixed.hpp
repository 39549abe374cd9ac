#pragma once

#include <Eigen/Dense>

#include "circflow/electrical.hpp"
#include "circflow/flow_state.hpp"
#include "circflow/graph.hpp"

namespace circflow {

// Replaces the 10^6 constant in R_p; see README for the measurement behind the default.
inline constexpr double kDefaultKappa = 100.0;

struct RegParams {
  int p = 4;
  double Rp = 0;
  double Rstar = 0;
  double delta = 0;
  double kappa = kDefaultKappa;
};

// p = smallest even integer >= (ln m)^(1/3), at least 4;
// R_p = p (kappa delta^2 |w|_1 ln|w|_1)^(p+1), R* = 3 delta^2 |w|_1^2.
RegParams chooseParams(double normW1, double m, double delta, double kappa = kDefaultKappa);

// log(1+t) on [-theta, theta], extended by the matching quadratic outside.
double tildeLog(double t, double theta = 0.1);
double tildeLogD1(double t, double theta = 0.1);
double tildeLogD2(double t, double theta = 0.1);

// Minimization form over circulations of `graph`:
//   F(x) = sum_e [q/2 x^2 + lambda/p x^p + barrier_e(x)] - <g, x>
// barrier_e(x) = -w+ wlog(1 - x/s+) - w- wlog(1 + x/s-) on arcs [0, barrierArcs()).
struct SeparableObjective {
  Digraph graph;
  Eigen::VectorXd linear;
  Eigen::VectorXd quad;
  Eigen::VectorXd power;
  int p = 4;
  Eigen::VectorXd wPlus, wMinus, sPlus, sMinus;
  double theta = 0.1;

  int barrierArcs() const { return static_cast<int>(wPlus.size()); }
  // Bound on log(F''(x+d)/F''(x)) for the barrier terms.
  double alpha() const;
  long double value(const Eigen::VectorXd& x) const;
  // F(x + d) - F(x), accumulated per arc so that small changes are not lost.
  long double change(const Eigen::VectorXd& x, const Eigen::VectorXd& d) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd curvature(const Eigen::VectorXd& x) const;
  // Norm of the circulation component of the gradient.
  double projectedGradient(const Eigen::VectorXd& x, const LaplacianOptions& lap = {}) const;
};

struct QuadPOptions {
  double tolAbs = 1e-9;
  // Relative to the size of the gradient's terms; rounding in r*x dominates when slacks are tiny.
  double tolRel = 1e-12;
  // Also stop once the projected gradient falls below this fraction of its starting value.
  double tolInitial = 0;
  int maxIterations = 500;
  LaplacianOptions laplacian;
};

struct QuadPResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double projectedGradient = 0;
  long double objective = 0;  // <g,x> - sum q/2 x^2 - sum lambda/p x^p
  bool converged = false;
};

// Maximizes <g,x> - 1/2 sum q x^2 - sum lambda/p x^p over circulations. Newton steps
// (one weighted Laplacian solve each) with backtracking on the exact objective.
QuadPResult solveQuadPlusP(const Digraph& graph, const Eigen::VectorXd& g, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& lambda, int p, const QuadPOptions& opts = {});

struct RefineOptions {
  double sandwichC = 2.0;  // p-term bounds 2^(+-c p)
  int maxRounds = 200;
  QuadPOptions inner{.tolInitial = 1e-3, .laplacian = {}};
};

struct RefineResult {
  Eigen::VectorXd x;
  double step = 0;           // scale applied to the model minimizer (0 when nothing improved)
  long double decrease = 0;  // F(old) - F(new) >= 0
  int innerIterations = 0;
};

// One iterative-refinement round: minimizes the lower quadratic/p-power model of F around x,
// then moves to the best point x + t d with t in [1/beta, 1], beta = max(e^alpha, 2^p), halving
// below 1/beta only if that point does not decrease F. Never increases F.
RefineResult refineOnce(const SeparableObjective& obj, const Eigen::VectorXd& x,
                        const RefineOptions& opts = {});

struct StepOptions {
  QuadPOptions inner;
  RefineOptions refine;
  bool checkBounds = true;
};

struct StepSolution {
  Eigen::VectorXd flow;       // f~ on G
  Eigen::VectorXd starFlow;   // net flow v -> v* per vertex (split evenly over its parallel edges)
  Eigen::VectorXd rhoPlus;    // f~ / s+
  Eigen::VectorXd rhoMinus;   // -f~ / s-
  Eigen::VectorXd deltaH;     // -R_p f~^(p-1)
  Eigen::VectorXd demand;     // B^T f~ on G
  long double objective = 0;  // maximization form
  double projectedGradient = 0;
  int iterations = 0;
  bool converged = false;
  double emax = 0;            // of the residual delta (w+/s+ - w-/s-)
  double demandBound = 0;     // bound on |d~|_1 implied by emax and R*
  double deltaHBound = 0;     // regularized steps: p |w|_1^(1/p) (kappa delta^2 |w|_1 ln|w|_1)^2
  double congestion = 0;      // |f~ / min(s+, s-)|_inf
  double pNorm = 0;           // p-norm over G arcs and individual star edges
  double alphaMin = 1, alphaMax = 1;  // barrier steps: averaged -wlog'' along the step

  double rhoInf() const;
  double demandL1() const { return demand.lpNorm<1>(); }
  double deltaHL1() const { return deltaH.lpNorm<1>(); }
};

// Extended graph: G's arcs then one arc v -> v* per vertex with count[v] > 0.
Digraph starExtendedGraph(const Digraph& g, const StarGraph& star);

// Regularized Newton step for residual h. With checkBounds, enforces |rho|_inf <= 1/2,
// |d~|_1 <= 1 and the |Delta h|_1 bound (StepInfeasible on failure).
StepSolution solveRegularizedStep(const FlowState& state, const StarGraph& star,
                                  const Eigen::VectorXd& h, const RegParams& params,
                                  const StepOptions& opts = {});

// Step on the wlog barrier objective at mu/(1+delta). Requires balanced arcs; raises
// StepInfeasible when the step leaves the region where wlog equals log.
StepSolution solveBarrierStep(const FlowState& state, const StarGraph& star, double delta,
                              const RegParams& params, const StepOptions& opts = {});

// max(w+, w-) <= delta |w|_1 or min(w+, w-) >= 96 delta^4 |w|_1^2
bool isBalanced(double wPlus, double wMinus, double delta, double normW1);

}  // namespace circflow
