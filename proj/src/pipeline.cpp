#include "circflow/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "circflow/errors.hpp"
#include "circflow/generator.hpp"
#include "circflow/repair.hpp"
#include "circflow/vanilla.hpp"

namespace circflow {

namespace {

struct PhaseOutcome {
  Status status = Status::Infeasible;
  std::vector<int> flow;
  int iterations = 0;
  int augmentedArcs = 0;
  double gap = 0;
  double demandPerturbation = 0;
  int repairPhases = 0;
  nlohmann::json diagnostics;
};

void check(std::vector<std::string>& out, bool ok, const std::string& what) {
  if (!ok) out.push_back(what);
}

void checkMonitor(const IpmMonitor& mon, int m, std::vector<std::string>& out) {
  int contraction = 0;
  for (auto [e0, e1] : mon.contraction)
    if (e0 <= 0.25 && e1 > 2 * e0 * e0 + 1e-12) ++contraction;
  check(out, contraction == 0, fmt::format("energy contraction failed on {} steps", contraction));
  double pred = 0, gap = 0, cen = 0;
  for (double v : mon.predictorEnergies) pred = std::max(pred, v);
  for (double v : mon.gapDeviations) gap = std::max(gap, v);
  for (double v : mon.centralityErrors) cen = std::max(cen, v);
  check(out, pred <= 0.25 + 1e-9, fmt::format("predictor energy {:.3g} > 1/4", pred));
  check(out, gap <= 1e-9, fmt::format("duality gap identity off by {:.3g}", gap));
  check(out, cen <= 1e-8, fmt::format("centrality error {:.3g}", cen));
  check(out, mon.weightsMonotone, "weights decreased");
  check(out, mon.maxWeightSum <= 3.0 * m, fmt::format("weight sum {:.1f} > 3m", mon.maxWeightSum));
}

void checkAccel(const AccelDiagnostics& d, AccelMethod method, std::vector<std::string>& out) {
  check(out, d.maxLedgerError <= 1e-8, fmt::format("demand ledger off by {:.3g}", d.maxLedgerError));
  check(out, d.maxRho <= 0.5, fmt::format("step congestion {:.3g} > 1/2", d.maxRho));
  const double demandCap = method == AccelMethod::Eleven8 ? 1.0 : 1.5;
  check(out, d.maxStepDemand <= demandCap, fmt::format("step demand {:.3g} above {}", d.maxStepDemand, demandCap));
  if (method == AccelMethod::Four3)
    check(out, d.maxCongestion <= 0.1, fmt::format("barrier congestion {:.3g} > 1/10", d.maxCongestion));
  check(out, d.weightsMonotone, "weights decreased");
  check(out, d.maxGapDeviation <= 1e-9, fmt::format("duality gap identity off by {:.3g}", d.maxGapDeviation));
  check(out, d.maxCentralityError <= 1e-8, fmt::format("centrality error {:.3g}", d.maxCentralityError));
}

// One instance with costs small enough to solve directly.
PhaseOutcome solvePhase(const Problem& p, const SolveOptions& o, std::string& stage,
                        std::vector<std::string>& violations) {
  PhaseOutcome out;
  stage = "augment";
  AugmentedProblem ap = augmentForInit(p);
  const int m = ap.combined.m();
  out.augmentedArcs = m;

  stage = "initialize";
  IpmMonitor mon;
  mon.checkpoints = o.checkInvariants;
  FlowState state = initialize(ap, {}, &mon);
  if (o.checkInvariants) {
    check(violations, state.wPlus.minCoeff() >= 1 && state.wMinus.minCoeff() >= 1, "initial weight below 1");
    check(violations, state.weightSum() <= 2.0 * m + 1, "initial weight sum above 2m+1");
  }
  const double eps = o.epsilon > 0 ? o.epsilon
                                   : std::max<double>(1.0, static_cast<double>(ap.cInf)) / std::pow(m, 3.0);

  PerturbedDemand demand = PerturbedDemand::of(ap.combined);
  if (o.method == Method::Vanilla) {
    stage = "vanilla";
    VanillaOptions vo;
    vo.deltaScale = o.deltaScale;
    vo.maxIterations = o.maxIterations;
    VanillaStats st = vanillaSolve(state, eps, vo, &mon);
    out.iterations = st.iterations;
    out.gap = st.finalGap;
  } else {
    AccelOptions ao;
    ao.method = o.method == Method::Eleven8 ? AccelMethod::Eleven8 : AccelMethod::Four3;
    stage = methodName(o.method);
    ao.deltaScale = o.deltaScale;
    ao.kappa = o.kappa;
    ao.strictDelta = o.strictDelta;
    ao.maxIterations = o.maxIterations;
    ao.checkpoints = o.checkInvariants;
    AccelDiagnostics diag;
    AccelStats st;
    try {
      st = accelSolve(state, demand, eps, ao, &diag, &mon);
    } catch (...) {
      out.diagnostics = diag.toJson();
      throw;
    }
    out.iterations = st.iterations;
    out.gap = st.finalGap;
    out.diagnostics = diag.toJson();
    if (o.checkInvariants) {
      checkAccel(diag, ao.method, violations);
      const double budget = st.iterations + (diag.minDelta > 0 ? 1.5 / diag.minDelta : 0.0);
      check(violations, demand.perturbation() <= budget,
            fmt::format("demand perturbation {:.4g} above budget {:.4g}", demand.perturbation(), budget));
    }
  }
  out.demandPerturbation = demand.perturbation();
  if (o.checkInvariants) checkMonitor(mon, m, violations);

  stage = "repair";
  RepairResult rep = repair(ap, state);
  out.repairPhases = rep.phases;
  out.status = rep.status;
  out.flow = std::move(rep.flow);
  return out;
}

long long maxShifted(const Problem& p, int k) {
  long long w = 0;
  for (const auto& a : p.arcs) w = std::max(w, std::llabs(a.cost >> k));
  return w;
}

}  // namespace

Method parseMethod(const std::string& name) {
  if (name == "vanilla") return Method::Vanilla;
  if (name == "eleven8") return Method::Eleven8;
  if (name == "four3") return Method::Four3;
  if (name == "oracle") return Method::Oracle;
  throw ConfigError("unknown method '" + name + "' (vanilla, eleven8, four3, oracle)");
}

std::string methodName(Method m) {
  switch (m) {
    case Method::Vanilla: return "vanilla";
    case Method::Eleven8: return "eleven8";
    case Method::Four3: return "four3";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

int RunReport::exitCode() const {
  if (!ok()) return 2;
  return status == "infeasible" ? 1 : 0;
}

nlohmann::json RunReport::toJson(bool withTiming) const {
  nlohmann::json j;
  j["status"] = status;
  j["method"] = method;
  j["n"] = n;
  j["m"] = m;
  j["max_cost"] = maxCost;
  j["iterations"] = iterations;
  j["final_gap"] = finalGap;
  j["demand_perturbation"] = demandPerturbation;
  j["repair_phases"] = repairPhases;
  j["scaling_phases"] = scalingPhases;
  j["cost"] = cost ? nlohmann::json(*cost) : nlohmann::json(nullptr);
  if (oracleCost) j["oracle_cost"] = *oracleCost;
  j["violations"] = violations;
  if (!error.empty()) {
    j["error_stage"] = errorStage;
    j["error"] = error;
  }
  if (!diagnostics.is_null()) j["diagnostics"] = diagnostics;
  if (!flow.empty()) j["flow"] = flow;
  if (withTiming) j["seconds"] = seconds;
  return j;
}

std::string RunReport::table() const {
  std::string s;
  auto row = [&](const std::string& k, const std::string& v) { s += fmt::format("{:<22}{}\n", k, v); };
  row("status", status);
  row("method", method);
  row("instance", fmt::format("n={} m={} W={}", n, m, maxCost));
  row("iterations", std::to_string(iterations));
  row("final gap", fmt::format("{:.3e}", finalGap));
  row("demand perturbation", fmt::format("{:.4g}", demandPerturbation));
  row("repair phases", std::to_string(repairPhases));
  if (scalingPhases > 1) row("scaling phases", std::to_string(scalingPhases));
  row("cost", cost ? std::to_string(*cost) : "-");
  if (oracleCost) row("oracle cost", std::to_string(*oracleCost));
  for (const auto& v : violations) row("violation", v);
  if (!error.empty()) row("error", errorStage + ": " + error);
  row("time", fmt::format("{:.3f}s", seconds));
  return s;
}

RunReport runSolve(const Problem& p, const SolveOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport r;
  r.method = methodName(o.method);
  r.n = p.n;
  r.m = p.m();
  std::string stage = "validate";
  try {
    validate(p);
    r.maxCost = p.maxAbsCost();
    if (p.m() == 0) {
      bool zero = std::all_of(p.demand.begin(), p.demand.end(), [](long long d) { return d == 0; });
      r.status = zero ? "optimal" : "infeasible";
      if (zero) r.cost = 0;
    } else if (o.method == Method::Oracle) {
      stage = "oracle";
      ExactSolution s = sspSolve(p);
      r.status = s.status == Status::Optimal ? "optimal" : "infeasible";
      if (s.status == Status::Optimal) {
        r.cost = s.cost;
        r.flow = s.flow;
      }
    } else {
      validateForSolve(p);
      const long long m = p.m();
      const long long threshold = o.scalingThreshold >= 0 ? o.scalingThreshold : m * m * m;
      int top = 0;
      while (maxShifted(p, top) > threshold) ++top;
      std::vector<long long> pot(p.n, 0);
      Status status = Status::Optimal;
      std::vector<int> flow;
      for (int k = top; k >= 0; --k) {
        Problem q = p;
        for (auto& a : q.arcs) {
          long long c = (a.cost >> k) + 2 * (pot[a.tail] - pot[a.head]);
          // Arcs whose reduced cost exceeds m+1 keep the previous phase's value in every
          // optimum, so clamping them changes no optimal flow.
          if (k < top) c = std::clamp(c, -(m + 1), m + 1);
          a.cost = c;
        }
        PhaseOutcome ph = solvePhase(q, o, stage, r.violations);
        ++r.scalingPhases;
        r.iterations += ph.iterations;
        r.finalGap = ph.gap;
        r.demandPerturbation += ph.demandPerturbation;
        r.repairPhases += ph.repairPhases;
        r.diagnostics = ph.diagnostics;
        if (ph.status == Status::Infeasible) {
          status = Status::Infeasible;
          break;
        }
        flow = std::move(ph.flow);
        if (k > 0) {
          stage = "scaling";
          std::vector<long long> phasePot = residualPotentials(q, flow);
          if (phasePot.empty()) throw ContractViolation("phase flow is not optimal for its costs");
          for (int v = 0; v < p.n; ++v) pot[v] = 2 * pot[v] + phasePot[v];
        }
      }
      if (status == Status::Optimal) {
        r.status = "optimal";
        r.cost = flowCost(p, flow);
        r.flow = std::move(flow);
      } else {
        r.status = "infeasible";
      }
    }
    if (o.verify) {
      stage = "verify";
      ExactSolution s = sspSolve(p);
      if (s.status == Status::Optimal) r.oracleCost = s.cost;
      const bool same = (s.status == Status::Optimal) == (r.status == "optimal") &&
                        (s.status != Status::Optimal || s.cost == r.cost);
      check(r.violations, same, "result differs from the SSP oracle");
    }
  } catch (const std::exception& e) {
    r.status = "error";
    r.errorStage = stage;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<nlohmann::json> runBench(const BenchOptions& opts) {
  std::vector<nlohmann::json> lines;
  Rng rng(opts.seed);
  double prevMean = 0;
  int prevSize = 0;
  for (int size : opts.sizes) {
    double total = 0;
    int counted = 0;
    for (int i = 0; i < opts.instancesPerSize; ++i) {
      nlohmann::json j;
      j["size"] = size;
      j["instance"] = i;
      try {
        const int n = std::max(3, size / 4);
        Problem p = randomFeasibleInstance(rng, n, size, opts.maxCost);
        RunReport r = runSolve(p, opts.solve);
        j.update(r.toJson(false));
        j.erase("flow");
        if (r.status == "optimal") {
          total += r.iterations;
          ++counted;
        }
      } catch (const std::exception& e) {
        j["status"] = "error";
        j["error"] = e.what();
      }
      lines.push_back(std::move(j));
    }
    nlohmann::json s;
    s["summary"] = true;
    s["size"] = size;
    s["method"] = methodName(opts.solve.method);
    const double mean = counted ? total / counted : 0.0;
    s["mean_iterations"] = mean;
    if (prevMean > 0 && mean > 0) {
      s["ratio"] = mean / prevMean;
      s["sqrt_size_ratio"] = std::sqrt(static_cast<double>(size) / prevSize);
    }
    lines.push_back(std::move(s));
    prevMean = mean;
    prevSize = size;
  }
  return lines;
}

}  // namespace circflow
