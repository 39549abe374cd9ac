#include "circflow/electrical.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <spdlog/spdlog.h>

#include "circflow/errors.hpp"

namespace circflow {

namespace {

void checkBalanced(const Eigen::VectorXd& b) {
  double sum = b.sum();
  double scale = b.cwiseAbs().sum();
  if (std::abs(sum) > 1e-9 * scale + 1e-300)
    throw ContractViolation("Laplacian injection does not sum to zero (sum " +
                            std::to_string(sum) + ")");
}

template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> reducedDense(const Digraph& g,
                                                                   const Eigen::VectorXd* conductance) {
  const int k = g.n - 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  for (int e = 0; e < g.m(); ++e) {
    Scalar c = conductance ? (*conductance)[e] : 1.0;
    int t = g.tail[e] - 1, h = g.head[e] - 1;
    if (t >= 0) a(t, t) += c;
    if (h >= 0) a(h, h) += c;
    if (t >= 0 && h >= 0) {
      a(t, h) -= c;
      a(h, t) -= c;
    }
  }
  return a;
}

Eigen::SparseMatrix<double> reducedSparse(const Digraph& g, const Eigen::VectorXd* conductance) {
  const int k = g.n - 1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * g.m());
  for (int e = 0; e < g.m(); ++e) {
    double c = conductance ? (*conductance)[e] : 1.0;
    int t = g.tail[e] - 1, h = g.head[e] - 1;
    if (t >= 0) trip.emplace_back(t, t, c);
    if (h >= 0) trip.emplace_back(h, h, c);
    if (t >= 0 && h >= 0) {
      trip.emplace_back(t, h, -c);
      trip.emplace_back(h, t, -c);
    }
  }
  Eigen::SparseMatrix<double> a(k, k);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

Eigen::VectorXd unpin(const Eigen::VectorXd& x) {
  Eigen::VectorXd phi(x.size() + 1);
  phi[0] = 0.0;
  phi.tail(x.size()) = x;
  return phi;
}

Eigen::VectorXd solvePinned(const Digraph& graph, const Eigen::VectorXd& conductance,
                            const Eigen::VectorXd& injection, const LaplacianOptions& opts) {
  if (graph.n <= 1) return Eigen::VectorXd::Zero(graph.n);
  Eigen::VectorXd rhs = injection.tail(graph.n - 1);
  if (rhs.isZero(0.0)) return Eigen::VectorXd::Zero(graph.n);

  if (graph.n <= opts.denseLimit) {
    Eigen::MatrixXd a = reducedDense(graph, &conductance);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    // Conductances spanning ~1e16 lose the smallest pivots to roundoff, already when the
    // diagonal is summed. Redo those in a wider mantissa.
    if (llt.info() == Eigen::Success) {
      const double minPivot = llt.matrixLLT().diagonal().cwiseAbs2().minCoeff();
      if (minPivot > 1e-9 * a.diagonal().maxCoeff()) return unpin(llt.solve(rhs));
    }
    Eigen::LLT<Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>> wide(
        reducedDense<long double>(graph, &conductance));
    if (wide.info() != Eigen::Success)
      throw SolverFailure("dense Laplacian factorization failed (graph disconnected?)",
                          std::numeric_limits<double>::infinity());
    Eigen::VectorXd x = wide.solve(rhs.cast<long double>()).cast<double>();
    return unpin(x);
  }

  Eigen::SparseMatrix<double> a = reducedSparse(graph, &conductance);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(opts.tol);
  cg.setMaxIterations(opts.iterationFactor * graph.n);
  cg.compute(a);
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw SolverFailure("conjugate gradient did not converge", cg.error());
  return unpin(x);
}

}  // namespace

Eigen::VectorXd solvePotentials(const Digraph& graph, const Eigen::VectorXd& conductance,
                                const Eigen::VectorXd& injection, const LaplacianOptions& opts) {
  checkBalanced(injection);
  return solvePinned(graph, conductance, injection, opts);
}

struct UnitProjector::Impl {
  Eigen::LLT<Eigen::MatrixXd> dense;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> sparse;
  bool useDense = true;
};

UnitProjector::UnitProjector(const Digraph& graph) : graph_(graph), impl_(std::make_unique<Impl>()) {
  if (graph.n <= 1) return;
  impl_->useDense = graph.n <= LaplacianOptions{}.denseLimit;
  bool ok;
  if (impl_->useDense) {
    impl_->dense.compute(reducedDense(graph, nullptr));
    ok = impl_->dense.info() == Eigen::Success;
  } else {
    impl_->sparse.compute(reducedSparse(graph, nullptr));
    ok = impl_->sparse.info() == Eigen::Success;
  }
  if (!ok) throw ContractViolation("unit Laplacian is singular: graph is not connected");
}

UnitProjector::~UnitProjector() = default;

Eigen::VectorXd UnitProjector::potentials(const Eigen::VectorXd& x) const {
  if (graph_.n <= 1) return Eigen::VectorXd::Zero(graph_.n);
  // Normal equations B^T B phi = B^T x; B^T is the divergence.
  Eigen::VectorXd rhs = divergenceOf(graph_, x).tail(graph_.n - 1);
  Eigen::VectorXd sol = impl_->useDense ? Eigen::VectorXd(impl_->dense.solve(rhs))
                                        : Eigen::VectorXd(impl_->sparse.solve(rhs));
  return unpin(sol);
}

Eigen::VectorXd UnitProjector::orthogonalPart(const Eigen::VectorXd& x) const {
  return x - gradientOf(graph_, potentials(x));
}

int clampResistances(Eigen::VectorXd& r) {
  if (r.size() == 0) return 0;
  double floor = 1e-20 * r.maxCoeff();
  int raised = 0;
  for (int e = 0; e < r.size(); ++e) {
    if (!(r[e] >= floor)) {
      r[e] = floor;
      ++raised;
    }
  }
  if (raised > 0) spdlog::debug("raised {} resistances to the numerical floor {:.3e}", raised, floor);
  return raised;
}

ElectricalFlow electricalFlow(const Digraph& graph, const Eigen::VectorXd& resistance,
                              const Eigen::VectorXd& h, const LaplacianOptions& opts) {
  Eigen::VectorXd r = resistance;
  clampResistances(r);
  Eigen::VectorXd conductance = r.cwiseInverse();
  Eigen::VectorXd hr = h.cwiseProduct(conductance);
  // B^T R^-1 B phi = -B^T R^-1 h. A divergence is balanced by construction; after
  // cancellation its rounded sum can still look large next to its own entries.
  Eigen::VectorXd injection = -divergenceOf(graph, hr);
  ElectricalFlow out;
  out.phi = solvePinned(graph, conductance, injection, opts);
  out.flow = (h + gradientOf(graph, out.phi)).cwiseProduct(conductance);
  out.energy = 0.5 * out.flow.cwiseAbs2().cwiseProduct(r).sum();
  return out;
}

double Correction::rhoInf() const {
  double a = rhoPlus.size() ? rhoPlus.cwiseAbs().maxCoeff() : 0.0;
  double b = rhoMinus.size() ? rhoMinus.cwiseAbs().maxCoeff() : 0.0;
  return std::max(a, b);
}

Correction correctionFlow(const FlowState& state, const Eigen::VectorXd& h,
                          const LaplacianOptions& opts) {
  if (state.sPlus.minCoeff() <= 0 || state.sMinus.minCoeff() <= 0)
    throw ContractViolation("correctionFlow needs 0 < f < 1");
  ElectricalFlow ef = electricalFlow(state.graph, state.resistance(), h, opts);
  Correction c;
  c.flow = std::move(ef.flow);
  c.phi = std::move(ef.phi);
  c.rhoPlus = c.flow.cwiseQuotient(state.sPlus);
  c.rhoMinus = -c.flow.cwiseQuotient(state.sMinus);
  c.energy = 0.5 * (state.wPlus.cwiseProduct(c.rhoPlus.cwiseAbs2()).sum() +
                    state.wMinus.cwiseProduct(c.rhoMinus.cwiseAbs2()).sum());
  return c;
}

double energy(const FlowState& state, const Eigen::VectorXd& h) {
  return correctionFlow(state, h).energy;
}

double emax(const FlowState& state, const Eigen::VectorXd& h) {
  return 0.5 * h.cwiseAbs2().cwiseQuotient(state.resistance()).sum();
}

}  // namespace circflow
