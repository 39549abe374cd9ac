#include "circflow/repair.hpp"

#include <cmath>

#include "circflow/errors.hpp"

namespace circflow {

namespace {

using LD = long double;

std::vector<long long> inDegree(const Problem& p) {
  std::vector<long long> in(p.n, 0);
  for (const auto& a : p.arcs) ++in[a.head];
  return in;
}

}  // namespace

long double MatchingInstance::gap() const {
  LD total = 0;
  for (int e = 0; e < problem.m(); ++e) {
    const Arc& a = problem.arcs[e];
    total += x[e] * (static_cast<LD>(a.cost) - yVertex[a.tail] - yArc[e]);
    total += (1 - x[e]) * (-yVertex[a.head] - yArc[e]);
  }
  return total;
}

long double MatchingInstance::maxDualViolation() const {
  LD worst = -std::numeric_limits<LD>::infinity();
  for (int e = 0; e < problem.m(); ++e) {
    const Arc& a = problem.arcs[e];
    worst = std::max(worst, yVertex[a.tail] + yArc[e] - static_cast<LD>(a.cost));
    worst = std::max(worst, yVertex[a.head] + yArc[e]);
  }
  return worst;
}

long double MatchingInstance::maxDegreeViolation() const {
  std::vector<LD> deg(problem.n, 0);
  for (int e = 0; e < problem.m(); ++e) {
    deg[problem.arcs[e].tail] += x[e];
    deg[problem.arcs[e].head] += 1 - x[e];
  }
  LD worst = 0;
  for (int v = 0; v < problem.n; ++v) worst = std::max(worst, std::fabs(deg[v] - b[v]));
  return worst;
}

bool MatchingInstance::integral() const {
  for (LD v : x)
    if (v != 0 && v != 1) return false;
  return true;
}

std::vector<long long> bFromDemand(const Problem& p, const std::vector<long long>& demand) {
  std::vector<long long> b = inDegree(p);
  for (int v = 0; v < p.n; ++v) b[v] -= demand[v];
  return b;
}

MatchingInstance flowToMatching(const FlowState& state, double* consistency) {
  const Problem& p = *state.problem;
  MatchingInstance inst;
  inst.problem = p;
  const int m = p.m();
  inst.x.resize(m);
  inst.yArc.resize(m);
  inst.yVertex.resize(p.n);
  for (int v = 0; v < p.n; ++v) inst.yVertex[v] = -state.pi[v];
  const LD mu = state.mu;
  LD worst = 0;
  for (int e = 0; e < m; ++e) {
    const Arc& a = p.arcs[e];
    inst.x[e] = state.preciseFlow(e);
    LD zPlus = mu * state.wPlus[e] / state.sPlus[e];
    LD zMinus = mu * state.wMinus[e] / state.sMinus[e];
    const LD viaTail = static_cast<LD>(a.cost) - inst.yVertex[a.tail] - zMinus;
    const LD viaHead = -inst.yVertex[a.head] - zPlus;
    const LD scale = std::fabs(static_cast<LD>(a.cost)) + std::fabs(inst.yVertex[a.tail]) +
                     std::fabs(inst.yVertex[a.head]) + zPlus + zMinus;
    worst = std::max(worst, std::fabs(viaTail - viaHead) / std::max<LD>(scale, 1));
    // Take the formula whose multiplier belongs to the smaller slack; the other multiplier
    // then absorbs the centrality residual weighted by the larger slack.
    inst.yArc[e] = state.sMinus[e] <= state.sPlus[e] ? viaTail : viaHead;
  }
  if (consistency) *consistency = static_cast<double>(worst);
  if (worst > 1e-7)
    throw ContractViolation("state is not central: dual propagation disagrees by " +
                            std::to_string(static_cast<double>(worst)));
  std::vector<long long> in = inDegree(p);
  inst.b.resize(p.n);
  // b routed by the fractional x itself
  Eigen::VectorXd div = divergenceOf(state.graph, state.flow());
  for (int v = 0; v < p.n; ++v) inst.b[v] = static_cast<LD>(in[v]) - div[v];
  return inst;
}

FixResult fixMatching(const MatchingInstance& inst, const std::vector<long long>& bhat) {
  const Problem& base = inst.problem;
  Problem p = base;
  std::vector<long long> in = inDegree(base);
  for (int v = 0; v < p.n; ++v) p.demand[v] = in[v] - bhat[v];

  FixResult res;
  std::vector<int> flow(p.m());
  for (int e = 0; e < p.m(); ++e) flow[e] = inst.x[e] >= 0.5L ? 1 : 0;
  std::vector<long long> rounded = divergenceOf(p, flow);
  for (int v = 0; v < p.n; ++v) res.discrepancy += std::llabs(rounded[v] - p.demand[v]);

  res.cyclesCancelled = cancelNegativeCycles(p, flow);
  std::vector<long long> pot = residualPotentials(p, flow);
  if (pot.empty()) throw ContractViolation("negative cycle left after cancellation");
  res.phases = augmentShortestPaths(p, flow, pot, true);
  res.matching = inst;
  res.matching.problem = p;
  if (res.phases < 0) {
    res.phases = 0;
    res.status = Status::Infeasible;
    return res;
  }
  if (!certifiesOptimal(p, flow, pot)) throw ContractViolation("repair produced an uncertified flow");

  MatchingInstance& out = res.matching;
  for (int v = 0; v < p.n; ++v) {
    out.yVertex[v] = -static_cast<LD>(pot[v]);
    out.b[v] = static_cast<LD>(bhat[v]);
  }
  for (int e = 0; e < p.m(); ++e) {
    const Arc& a = p.arcs[e];
    out.x[e] = flow[e];
    out.yArc[e] = static_cast<LD>(std::min(a.cost + pot[a.tail], pot[a.head]));
  }
  res.status = Status::Optimal;
  return res;
}

FlowCertificate matchingToFlow(const MatchingInstance& inst) {
  if (!inst.integral()) throw ContractViolation("matchingToFlow needs an integral matching");
  const Problem& p = inst.problem;
  auto integer = [](LD v) {
    const LD r = std::round(v);
    if (std::fabs(v - r) > 1e-9L) throw ContractViolation("matching dual is not integral");
    return static_cast<long long>(r);
  };
  FlowCertificate cert;
  const int m = p.m();
  cert.flow.resize(m);
  cert.zPlus.resize(m);
  cert.zMinus.resize(m);
  for (int e = 0; e < m; ++e) {
    const Arc& a = p.arcs[e];
    cert.flow[e] = inst.x[e] == 1 ? 1 : 0;
    const long long yArc = integer(inst.yArc[e]);
    cert.zMinus[e] = a.cost - integer(inst.yVertex[a.tail]) - yArc;
    cert.zPlus[e] = -integer(inst.yVertex[a.head]) - yArc;
    if (cert.zMinus[e] < 0 || cert.zPlus[e] < 0) throw ContractViolation("matching dual is infeasible");
    if (cert.flow[e] * cert.zMinus[e] != 0 || (1 - cert.flow[e]) * cert.zPlus[e] != 0)
      throw ContractViolation("complementary slackness fails on arc " + std::to_string(e));
  }
  cert.cost = flowCost(p, cert.flow);
  return cert;
}

RepairResult repair(const AugmentedProblem& ap, const FlowState& state) {
  RepairResult res;
  const Problem& comb = ap.combined;
  std::vector<long long> bhat = bFromDemand(comb, comb.demand);
  MatchingInstance inst;
  if (comb.m() > 0) {
    inst = flowToMatching(state);
    res.matchingGap = static_cast<double>(inst.gap());
  } else {
    inst.problem = comb;
    inst.b.assign(comb.n, 0);
    inst.yVertex.assign(comb.n, 0);
  }
  FixResult fix = fixMatching(inst, bhat);
  res.phases = fix.phases;
  res.cyclesCancelled = fix.cyclesCancelled;
  res.discrepancy = fix.discrepancy;
  if (fix.status == Status::Infeasible) return res;
  FlowCertificate cert = matchingToFlow(fix.matching);
  for (int e = 0; e < comb.m(); ++e)
    if (ap.auxiliary[e] && cert.flow[e]) res.auxiliaryUsed = true;
  if (res.auxiliaryUsed) return res;
  res.flow.assign(cert.flow.begin(), cert.flow.begin() + ap.base.m());
  res.cost = flowCost(ap.base, res.flow);
  res.status = Status::Optimal;
  return res;
}

}  // namespace circflow
