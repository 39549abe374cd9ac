#include "circflow/mixed.hpp"

#include <cmath>
#include <spdlog/spdlog.h>

#include "circflow/errors.hpp"

namespace circflow {

namespace {

using LD = long double;

template <typename T>
T tildeLogT(T t, T th) {
  if (t > th) {
    T u = t - th;
    return std::log1p(th) + u / (1 + th) - u * u / (2 * (1 + th) * (1 + th));
  }
  if (t < -th) {
    T u = t + th;
    return std::log1p(-th) + u / (1 - th) - u * u / (2 * (1 - th) * (1 - th));
  }
  return std::log1p(t);
}

// L(t1) - L(t0) without cancelling two logs of nearly equal size.
LD tildeLogDiff(LD t0, LD t1, LD th) {
  if (std::fabs(t0) <= th && std::fabs(t1) <= th) return std::log1p((t1 - t0) / (1 + t0));
  return tildeLogT(t1, th) - tildeLogT(t0, th);
}

LD ipowl(LD x, int k) {
  LD r = 1;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// (x + s)^p - x^p
LD powerDiff(LD x, LD s, int p) {
  // sum_k C(p,k) x^(p-k) s^k, by Horner in s
  LD total = 0, binom = 1;
  LD coef[33];
  for (int k = 0; k <= p && k <= 32; ++k) {
    coef[k] = binom;
    binom = binom * (p - k) / (k + 1);
  }
  for (int k = p; k >= 1; --k) total = total * s + coef[k] * ipowl(x, p - k);
  return total * s;
}

double ipow(double x, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double barrierCurvature(const SeparableObjective& o, int e, double x) {
  const double tp = -x / o.sPlus[e], tm = x / o.sMinus[e];
  return -o.wPlus[e] / (o.sPlus[e] * o.sPlus[e]) * tildeLogD2(tp, o.theta) -
         o.wMinus[e] / (o.sMinus[e] * o.sMinus[e]) * tildeLogD2(tm, o.theta);
}

double gradientScale(const Eigen::VectorXd& g, const Eigen::VectorXd& q, const Eigen::VectorXd& lambda,
                     const Eigen::VectorXd& x, int p) {
  double a = 0, b = 0;
  for (int e = 0; e < x.size(); ++e) {
    a += ipow(q[e] * x[e], 2);
    b += ipow(lambda[e] * ipow(x[e], p - 1), 2);
  }
  return g.norm() + std::sqrt(a) + std::sqrt(b);
}

double circulationNorm(const Digraph& graph, const Eigen::VectorXd& v, const LaplacianOptions& lap) {
  if (v.size() == 0) return 0.0;
  return electricalFlow(graph, Eigen::VectorXd::Ones(v.size()), v, lap).flow.norm();
}

}  // namespace

RegParams chooseParams(double normW1, double m, double delta, double kappa) {
  if (!(m >= 1) || !(normW1 >= m) || !(delta > 0))
    throw ContractViolation("chooseParams needs |w|_1 >= m >= 1 and delta > 0");
  RegParams r;
  const double root = std::cbrt(std::log(m));
  int p = static_cast<int>(std::ceil(root - 1e-12));
  if (p % 2) ++p;
  r.p = std::max(p, 4);
  r.delta = delta;
  r.kappa = kappa;
  r.Rp = r.p * std::pow(kappa * delta * delta * normW1 * std::log(normW1), r.p + 1);
  r.Rstar = 3 * delta * delta * normW1 * normW1;
  return r;
}

double tildeLog(double t, double theta) { return tildeLogT(t, theta); }

double tildeLogD1(double t, double theta) {
  if (t > theta) return 1 / (1 + theta) - (t - theta) / ((1 + theta) * (1 + theta));
  if (t < -theta) return 1 / (1 - theta) - (t + theta) / ((1 - theta) * (1 - theta));
  return 1 / (1 + t);
}

double tildeLogD2(double t, double theta) {
  if (t > theta) return -1 / ((1 + theta) * (1 + theta));
  if (t < -theta) return -1 / ((1 - theta) * (1 - theta));
  return -1 / ((1 + t) * (1 + t));
}

bool isBalanced(double wPlus, double wMinus, double delta, double normW1) {
  return std::max(wPlus, wMinus) <= delta * normW1 ||
         std::min(wPlus, wMinus) >= 96 * ipow(delta, 4) * normW1 * normW1;
}

double SeparableObjective::alpha() const { return 2 * std::log((1 + theta) / (1 - theta)); }

long double SeparableObjective::value(const Eigen::VectorXd& x) const {
  return change(Eigen::VectorXd::Zero(x.size()), x);
}

long double SeparableObjective::change(const Eigen::VectorXd& x, const Eigen::VectorXd& d) const {
  LD total = 0;
  const int nb = barrierArcs();
  for (int e = 0; e < x.size(); ++e) {
    const LD xe = x[e], de = d[e];
    LD v = -static_cast<LD>(linear[e]) * de;
    if (quad[e] != 0) v += static_cast<LD>(quad[e]) / 2 * (2 * xe * de + de * de);
    if (power[e] != 0) v += static_cast<LD>(power[e]) / p * powerDiff(xe, de, p);
    if (e < nb) {
      const LD sp = sPlus[e], sm = sMinus[e];
      v -= static_cast<LD>(wPlus[e]) * tildeLogDiff(-xe / sp, -(xe + de) / sp, theta);
      v -= static_cast<LD>(wMinus[e]) * tildeLogDiff(xe / sm, (xe + de) / sm, theta);
    }
    total += v;
  }
  return total;
}

Eigen::VectorXd SeparableObjective::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(x.size());
  const int nb = barrierArcs();
  for (int e = 0; e < x.size(); ++e) {
    double v = -linear[e] + quad[e] * x[e] + power[e] * ipow(x[e], p - 1);
    if (e < nb) {
      v += wPlus[e] / sPlus[e] * tildeLogD1(-x[e] / sPlus[e], theta) -
           wMinus[e] / sMinus[e] * tildeLogD1(x[e] / sMinus[e], theta);
    }
    g[e] = v;
  }
  return g;
}

Eigen::VectorXd SeparableObjective::curvature(const Eigen::VectorXd& x) const {
  Eigen::VectorXd c(x.size());
  const int nb = barrierArcs();
  for (int e = 0; e < x.size(); ++e) {
    c[e] = quad[e] + power[e] * (p - 1) * ipow(x[e], p - 2);
    if (e < nb) c[e] += barrierCurvature(*this, e, x[e]);
  }
  return c;
}

double SeparableObjective::projectedGradient(const Eigen::VectorXd& x, const LaplacianOptions& lap) const {
  return circulationNorm(graph, gradient(x), lap);
}

QuadPResult solveQuadPlusP(const Digraph& graph, const Eigen::VectorXd& g, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& lambda, int p, const QuadPOptions& opts) {
  if (p < 4 || p % 2 || p > 32) throw ContractViolation("solveQuadPlusP needs an even p in [4, 32]");
  const int m = graph.m();
  QuadPResult res;
  res.x = Eigen::VectorXd::Zero(m);
  if (m == 0) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd& x = res.x;
  auto gain = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& d) {
    LD total = 0;
    for (int e = 0; e < m; ++e) {
      const LD xe = at[e], de = d[e];
      total += static_cast<LD>(g[e]) * de - static_cast<LD>(q[e]) / 2 * (2 * xe * de + de * de) -
               static_cast<LD>(lambda[e]) / p * powerDiff(xe, de, p);
    }
    return total;
  };

  Eigen::VectorXd grad(m), hess(m);
  double initial = -1;
  for (;;) {
    for (int e = 0; e < m; ++e) {
      const double xp = ipow(x[e], p - 2);
      grad[e] = g[e] - q[e] * x[e] - lambda[e] * xp * x[e];
      hess[e] = q[e] + lambda[e] * (p - 1) * xp;
    }
    res.projectedGradient = circulationNorm(graph, grad, opts.laplacian);
    if (initial < 0) initial = res.projectedGradient;
    if (res.projectedGradient <= opts.tolAbs + opts.tolRel * gradientScale(g, q, lambda, x, p) ||
        res.projectedGradient <= opts.tolInitial * initial) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opts.maxIterations)
      throw SolverFailure("solveQuadPlusP hit its iteration cap", res.projectedGradient);
    ++res.iterations;
    Eigen::VectorXd d = electricalFlow(graph, hess, grad, opts.laplacian).flow;
    const double slope = grad.dot(d);
    if (!(slope > 0)) break;
    double t = 1.0;
    while (t > 1e-12 && gain(x, t * d) < 1e-4 * t * slope) t *= 0.5;
    if (t <= 1e-12) break;  // no representable improvement left
    x += t * d;
  }
  res.objective = gain(Eigen::VectorXd::Zero(m), x);
  return res;
}

RefineResult refineOnce(const SeparableObjective& obj, const Eigen::VectorXd& x,
                        const RefineOptions& opts) {
  const int m = static_cast<int>(x.size());
  const int p = obj.p;
  const double shrink = std::pow(2.0, -opts.sandwichC * p);
  const double ea = std::exp(obj.alpha());
  const int nb = obj.barrierArcs();

  Eigen::VectorXd grad = obj.gradient(x);
  Eigen::VectorXd qk(m), lk(m);
  for (int e = 0; e < m; ++e) {
    qk[e] = obj.quad[e] + 2 * obj.power[e] / p * shrink * ipow(std::fabs(x[e]), p - 2);
    if (e < nb) qk[e] += barrierCurvature(obj, e, x[e]) / ea;
    lk[e] = obj.power[e] * shrink;
  }
  QuadPResult inner = solveQuadPlusP(obj.graph, -grad, qk, lk, p, opts.inner);

  RefineResult out;
  out.x = x;
  out.innerIterations = inner.iterations;
  // F(x + t d) is convex in t: locate its minimizer on [1/beta, 1] from the sign of the
  // directional derivative.
  const Eigen::VectorXd& d = inner.x;
  const double beta = std::max(ea, std::pow(2.0, p));
  auto slope = [&](double t) { return obj.gradient(x + t * d).dot(d); };
  double lo = 1.0 / beta, hi = 1.0, t;
  if (slope(hi) <= 0) {
    t = hi;
  } else if (slope(lo) >= 0) {
    t = lo;
  } else {
    // Newton on the slope, falling back to bisection when it leaves the bracket.
    t = 0.5 * (lo + hi);
    for (int it = 0; it < 40 && hi - lo > 1e-12; ++it) {
      const Eigen::VectorXd y = x + t * d;
      const double s1 = obj.gradient(y).dot(d);
      if (s1 == 0) break;
      (s1 < 0 ? lo : hi) = t;
      const double s2 = obj.curvature(y).dot(d.cwiseAbs2());
      double next = s2 > 0 ? t - s1 / s2 : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - t) <= 1e-12 * t) {
        t = next;
        break;
      }
      t = next;
    }
  }
  LD best = obj.change(x, t * d);
  double bestT = best < 0 ? t : 0.0;
  for (t = std::min(t, 1.0 / beta) * 0.5; bestT == 0 && t > 1e-12; t *= 0.5) {
    LD c = obj.change(x, t * d);
    if (c < 0) {
      best = c;
      bestT = t;
    }
  }
  if (bestT == 0) best = 0;
  if (bestT > 0) out.x = x + bestT * inner.x;
  out.step = bestT;
  out.decrease = -best;
  return out;
}

double StepSolution::rhoInf() const {
  double a = rhoPlus.size() ? rhoPlus.cwiseAbs().maxCoeff() : 0.0;
  double b = rhoMinus.size() ? rhoMinus.cwiseAbs().maxCoeff() : 0.0;
  return std::max(a, b);
}

Digraph starExtendedGraph(const Digraph& g, const StarGraph& star) {
  Digraph ext = g;
  ext.n = g.n + 1;
  for (int v = 0; v < g.n; ++v) {
    if (star.count[v] == 0) continue;
    ext.tail.push_back(v);
    ext.head.push_back(g.n);
  }
  return ext;
}

namespace {

// Quadratic and p-power coefficients of the grouped star edges: k parallel edges carrying
// t/k each cost (R*/k)/2 t^2 + (R_p/k^(p-1))/p t^p in total.
void appendStarTerms(const StarGraph& star, const RegParams& prm, Eigen::VectorXd& quad,
                     Eigen::VectorXd& power, int offset) {
  int j = offset;
  for (int v = 0; v < star.n; ++v) {
    if (star.count[v] == 0) continue;
    const double k = static_cast<double>(star.count[v]);
    quad[j] = prm.Rstar / k;
    power[j] = prm.Rp / std::pow(k, prm.p - 1);
    ++j;
  }
}

StepSolution assemble(const FlowState& s, const StarGraph& star, const RegParams& prm,
                      const Eigen::VectorXd& x) {
  const int m = s.m();
  StepSolution st;
  st.flow = x.head(m);
  st.starFlow = Eigen::VectorXd::Zero(s.n());
  double pn = 0;
  int j = m;
  for (int v = 0; v < s.n(); ++v) {
    if (star.count[v] == 0) continue;
    st.starFlow[v] = x[j++];
    const double k = static_cast<double>(star.count[v]);
    pn += k * ipow(st.starFlow[v] / k, prm.p);
  }
  for (int e = 0; e < m; ++e) pn += ipow(st.flow[e], prm.p);
  st.rhoPlus = st.flow.cwiseQuotient(s.sPlus);
  st.rhoMinus = -st.flow.cwiseQuotient(s.sMinus);
  st.deltaH.resize(m);
  for (int e = 0; e < m; ++e) st.deltaH[e] = -prm.Rp * ipow(st.flow[e], prm.p - 1);
  st.demand = divergenceOf(s.graph, st.flow);
  double cong = 0;
  for (int e = 0; e < m; ++e)
    cong = std::max(cong, std::fabs(st.flow[e]) / std::min(s.sPlus[e], s.sMinus[e]));
  st.congestion = cong;
  st.pNorm = std::pow(pn, 1.0 / prm.p);
  const Eigen::VectorXd a = s.barrierGradient();
  st.emax = 0.5 * (prm.delta * a).cwiseAbs2().cwiseQuotient(s.resistance()).sum();
  return st;
}

}  // namespace

StepSolution solveRegularizedStep(const FlowState& state, const StarGraph& star,
                                  const Eigen::VectorXd& h, const RegParams& params,
                                  const StepOptions& opts) {
  const int m = state.m();
  Digraph ext = starExtendedGraph(state.graph, star);
  const int me = ext.m();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(me), quad(me), power(me);
  g.head(m) = h;
  quad.head(m) = state.resistance();
  power.head(m).setConstant(params.Rp);
  appendStarTerms(star, params, quad, power, m);

  QuadPResult sol = solveQuadPlusP(ext, g, quad, power, params.p, opts.inner);
  StepSolution st = assemble(state, star, params, sol.x);
  st.objective = sol.objective;
  st.projectedGradient = sol.projectedGradient;
  st.iterations = sol.iterations;
  st.converged = sol.converged;
  // Routing cost bound: R*/2 sum f'^2 <= emax(h), and sum over vertices of the edge counts
  // is at most 3|w|_1.
  const double normW = state.weightSum();
  const double emaxH = 0.5 * h.cwiseAbs2().cwiseQuotient(state.resistance()).sum();
  st.demandBound = std::sqrt(6 * normW * emaxH / params.Rstar);
  const double inner = params.kappa * params.delta * params.delta * normW * std::log(normW);
  st.deltaHBound = params.p * std::pow(normW, 1.0 / params.p) * inner * inner;
  if (!opts.checkBounds) return st;

  if (st.rhoInf() > 0.5)
    throw StepInfeasible("regularized step congestion " + std::to_string(st.rhoInf()) + " > 1/2");
  if (st.demandL1() > 1.0)
    throw StepInfeasible("regularized step demand perturbation " + std::to_string(st.demandL1()) + " > 1");
  const double dhBound = st.deltaHBound;
  if (st.deltaHL1() > dhBound)
    throw StepInfeasible("regularized step |Delta h|_1 = " + std::to_string(st.deltaHL1()) +
                         " exceeds " + std::to_string(dhBound));
  if (st.demandL1() > st.demandBound * (1 + 1e-6) + 1e-12)
    throw ContractViolation("regularized step routes more demand than its energy allows");
  return st;
}

StepSolution solveBarrierStep(const FlowState& state, const StarGraph& star, double delta,
                              const RegParams& params, const StepOptions& opts) {
  const int m = state.m();
  const double normW = state.weightSum();
  for (int e = 0; e < m; ++e) {
    if (!isBalanced(state.wPlus[e], state.wMinus[e], delta, normW))
      throw ContractViolation("solveBarrierStep needs balanced weights (arc " + std::to_string(e) + ")");
  }
  SeparableObjective obj;
  obj.graph = starExtendedGraph(state.graph, star);
  const int me = obj.graph.m();
  obj.p = params.p;
  obj.linear = Eigen::VectorXd::Zero(me);
  obj.linear.head(m) = (1 + delta) * state.barrierGradient();
  obj.quad = Eigen::VectorXd::Zero(me);
  obj.power.resize(me);
  obj.power.head(m).setConstant(params.Rp);
  appendStarTerms(star, params, obj.quad, obj.power, m);
  obj.wPlus = state.wPlus;
  obj.wMinus = state.wMinus;
  obj.sPlus = state.sPlus;
  obj.sMinus = state.sMinus;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(me);
  int rounds = 0;
  double pg = 0;
  bool converged = false;
  const double tol = opts.inner.tolAbs;
  for (;;) {
    Eigen::VectorXd grad = obj.gradient(x);
    pg = circulationNorm(obj.graph, grad, opts.inner.laplacian);
    const double scale = obj.linear.norm() + (grad + obj.linear).norm();
    if (pg <= tol + opts.inner.tolRel * scale) {
      converged = true;
      break;
    }
    if (rounds >= opts.refine.maxRounds) break;
    RefineResult r = refineOnce(obj, x, opts.refine);
    ++rounds;
    if (r.step == 0) break;
    x = std::move(r.x);
  }
  if (!converged)
    spdlog::debug("barrier step stopped after {} rounds with projected gradient {:.3e}", rounds, pg);

  StepSolution st = assemble(state, star, params, x);
  st.objective = -obj.value(x);
  st.projectedGradient = pg;
  st.iterations = rounds;
  st.converged = converged;
  st.demandBound = 3 * std::sqrt(normW * st.emax / params.Rstar);

  // Average of -wlog'' over the segment each barrier argument travels.
  const double th = obj.theta;
  auto avg = [&](double t) { return std::fabs(t) < 1e-300 ? 1.0 : (1 - tildeLogD1(t, th)) / t; };
  st.alphaMin = 1;
  st.alphaMax = 1;
  for (int e = 0; e < m; ++e) {
    for (double t : {-x[e] / state.sPlus[e], x[e] / state.sMinus[e]}) {
      const double a = avg(t);
      st.alphaMin = std::min(st.alphaMin, a);
      st.alphaMax = std::max(st.alphaMax, a);
    }
  }
  const double lo = 1 / ((1 + th) * (1 + th)), hi = 1 / ((1 - th) * (1 - th));
  if (st.alphaMin < lo * (1 - 1e-9) || st.alphaMax > hi * (1 + 1e-9))
    throw ContractViolation("averaged barrier curvature outside its sandwich");
  if (!opts.checkBounds) return st;

  if (st.congestion > th)
    throw StepInfeasible("barrier step congestion " + std::to_string(st.congestion) + " > 1/10");
  if (st.demandL1() > 1.5)
    throw StepInfeasible("barrier step demand perturbation " + std::to_string(st.demandL1()) + " > 3/2");
  if (st.demandL1() > st.demandBound * (1 + 1e-6) + 1e-12)
    throw ContractViolation("barrier step routes more demand than its energy allows");
  return st;
}

}  // namespace circflow
