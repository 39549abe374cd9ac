#pragma once

#include <Eigen/Dense>
#include <memory>

#include "circflow/flow_state.hpp"
#include "circflow/generator.hpp"
#include "circflow/graph.hpp"

namespace circflow::testing {

// a -> b cost 1, b -> c cost 1, a -> c cost 3, one unit from a to c.
inline Problem triangle() {
  Problem p;
  p.n = 3;
  p.arcs = {{0, 1, 1}, {1, 2, 1}, {0, 2, 3}};
  p.demand = {-1, 0, 1};
  return p;
}

inline Problem twoCycle(long long c1 = 0, long long c2 = 0) {
  Problem p;
  p.n = 2;
  p.arcs = {{0, 1, c1}, {1, 0, c2}};
  p.demand = {0, 0};
  return p;
}

inline Problem singleArc(long long cost) {
  Problem p;
  p.n = 2;
  p.arcs = {{0, 1, cost}};
  p.demand = {-1, 1};
  return p;
}

// Full incidence, rows = arcs.
inline Eigen::MatrixXd incidence(const Digraph& g) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(g.m(), g.n);
  for (int e = 0; e < g.m(); ++e) {
    B(e, g.head[e]) += 1;
    B(e, g.tail[e]) -= 1;
  }
  return B;
}

// argmin 1/2 x^T diag(r) x - <h, x> subject to B^T x = 0, by a dense KKT solve.
inline Eigen::VectorXd denseCirculationQP(const Digraph& g, const Eigen::VectorXd& r,
                                          const Eigen::VectorXd& h) {
  const int m = g.m(), n = g.n;
  Eigen::MatrixXd B = incidence(g);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + n, m + n);
  K.topLeftCorner(m, m) = r.asDiagonal();
  K.topRightCorner(m, n) = B;
  K.bottomLeftCorner(n, m) = B.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
  rhs.head(m) = h;
  Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(m);
}

// Interior state with random flows in [lo, 1 - lo] and weights in [1, 3].
inline FlowState randomState(Rng& rng, const Problem& p, double mu = 1.0, double lo = 0.05) {
  FlowState s = makeHalfState(std::make_shared<Problem>(p), mu);
  std::uniform_real_distribution<double> f(lo, 1 - lo), w(1, 3);
  for (int e = 0; e < s.m(); ++e) {
    s.sMinus[e] = f(rng);
    s.sPlus[e] = 1 - s.sMinus[e];
    s.wPlus[e] = w(rng);
    s.wMinus[e] = w(rng);
  }
  return s;
}

}  // namespace circflow::testing
