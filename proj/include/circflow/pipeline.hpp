#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circflow/accel.hpp"
#include "circflow/graph.hpp"
#include "circflow/oracle.hpp"
#include "json.hpp"

namespace circflow {

enum class Method { Vanilla, Eleven8, Four3, Oracle };

Method parseMethod(const std::string& name);
std::string methodName(Method m);

struct SolveOptions {
  Method method = Method::Vanilla;
  double epsilon = 0;      // termination gap; <= 0 selects max(1, c_inf) / m^3 on the augmented instance
  double deltaScale = 1.0;
  double kappa = kDefaultKappa;
  bool strictDelta = false;
  int maxIterations = 1000000;
  bool verify = false;     // compare against the SSP oracle
  bool checkInvariants = true;
  long long scalingThreshold = -1;  // bit scaling when |c|_inf exceeds this; < 0 selects m^3
};

struct RunReport {
  std::string status;  // optimal | infeasible | error
  std::string method;
  int n = 0;
  int m = 0;
  long long maxCost = 0;
  int iterations = 0;
  double finalGap = 0;
  double demandPerturbation = 0;  // |d_cur - d|_1 before repair, summed over scaling phases
  int repairPhases = 0;
  int scalingPhases = 0;
  std::optional<long long> cost;
  std::optional<long long> oracleCost;
  std::vector<int> flow;
  std::vector<std::string> violations;
  std::string errorStage;
  std::string error;
  double seconds = 0;
  nlohmann::json diagnostics;  // accelerated methods only

  bool ok() const { return status != "error" && violations.empty(); }
  int exitCode() const;
  nlohmann::json toJson(bool withTiming = true) const;
  std::string table() const;
};

// Augmentation, centering, the chosen interior-point method and repair; oracle costs when asked.
// Errors are caught and reported with the stage that raised them.
RunReport runSolve(const Problem& p, const SolveOptions& opts = {});

struct BenchOptions {
  std::vector<int> sizes;  // arc counts
  int instancesPerSize = 3;
  std::uint64_t seed = 1;
  long long maxCost = 20;
  SolveOptions solve;
};

// One JSON object per instance, then one summary object per size (mean iterations and the
// ratio to the previous size). Timings are left out so equal seeds give identical output.
std::vector<nlohmann::json> runBench(const BenchOptions& opts);

}  // namespace circflow
