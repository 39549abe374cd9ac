#pragma once

#include <Eigen/Dense>
#include <memory>

#include "circflow/flow_state.hpp"
#include "circflow/graph.hpp"

namespace circflow {

struct LaplacianOptions {
  double tol = 1e-10;      // relative residual for the iterative path
  int denseLimit = 200;    // vertex count up to which a dense Cholesky factor is used
  int iterationFactor = 50;
};

// Solves L phi = b, L = B^T diag(g) B, with vertex 0 pinned to zero.
Eigen::VectorXd solvePotentials(const Digraph& graph, const Eigen::VectorXd& conductance,
                                const Eigen::VectorXd& injection,
                                const LaplacianOptions& opts = {});

// Cached factor of the unit-conductance Laplacian; projects arc vectors onto Im(B).
class UnitProjector {
 public:
  explicit UnitProjector(const Digraph& graph);
  ~UnitProjector();
  UnitProjector(const UnitProjector&) = delete;
  UnitProjector& operator=(const UnitProjector&) = delete;

  // argmin_phi ||x - B phi||_2 with phi[0] = 0
  Eigen::VectorXd potentials(const Eigen::VectorXd& x) const;
  // x - B phi for the least-squares phi
  Eigen::VectorXd orthogonalPart(const Eigen::VectorXd& x) const;
  const Digraph& graph() const { return graph_; }

 private:
  struct Impl;
  Digraph graph_;
  std::unique_ptr<Impl> impl_;
};

// Minimizer of 1/2 sum r x^2 - <h, x> over circulations: x = R^{-1}(h + B phi).
struct ElectricalFlow {
  Eigen::VectorXd flow;
  Eigen::VectorXd phi;
  double energy = 0;  // 1/2 sum r x^2
};

ElectricalFlow electricalFlow(const Digraph& graph, const Eigen::VectorXd& resistance,
                              const Eigen::VectorXd& h, const LaplacianOptions& opts = {});

// Clamps resistances below at 1e-20 of their maximum; returns how many were raised.
int clampResistances(Eigen::VectorXd& r);

struct Correction {
  Eigen::VectorXd flow;      // f~
  Eigen::VectorXd rhoPlus;   // f~ / s+
  Eigen::VectorXd rhoMinus;  // -f~ / s-
  Eigen::VectorXd phi;
  double energy = 0;
  double rhoInf() const;
};

Correction correctionFlow(const FlowState& state, const Eigen::VectorXd& h,
                          const LaplacianOptions& opts = {});
double energy(const FlowState& state, const Eigen::VectorXd& h);
// 1/2 sum h^2 / r, no linear solve.
double emax(const FlowState& state, const Eigen::VectorXd& h);

}  // namespace circflow
