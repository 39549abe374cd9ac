#include <gtest/gtest.h>

#include <cmath>

#include "circflow/errors.hpp"
#include "circflow/pipeline.hpp"
#include "support.hpp"

using namespace circflow;
using namespace circflow::testing;

TEST(ParseMethod, NamesRoundTrip) {
  for (Method m : {Method::Vanilla, Method::Eleven8, Method::Four3, Method::Oracle})
    EXPECT_EQ(parseMethod(methodName(m)), m);
  EXPECT_THROW(parseMethod("simplex"), ConfigError);
}

TEST(RunSolve, OracleOnTriangle) {
  SolveOptions o;
  o.method = Method::Oracle;
  RunReport r = runSolve(triangle(), o);
  EXPECT_EQ(r.status, "optimal");
  EXPECT_EQ(r.cost, 2);
  EXPECT_EQ(r.exitCode(), 0);
}

TEST(RunSolve, EveryMethodOnTriangle) {
  for (Method m : {Method::Vanilla, Method::Eleven8, Method::Four3}) {
    SolveOptions o;
    o.method = m;
    o.verify = true;
    RunReport r = runSolve(triangle(), o);
    EXPECT_EQ(r.status, "optimal") << r.error;
    EXPECT_EQ(r.cost, 2);
    EXPECT_EQ(r.oracleCost, 2);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_EQ(r.flow, (std::vector<int>{1, 1, 0}));
  }
}

TEST(RunSolve, VanillaMatchesOracle) {
  Rng rng(61);
  std::uniform_int_distribution<int> nd(3, 30);
  for (int i = 0; i < 60; ++i) {
    const int n = nd(rng);
    const int m = std::uniform_int_distribution<int>(n - 1, 120)(rng);
    Problem p = randomFeasibleInstance(rng, n, m, 20);
    SolveOptions o;
    o.verify = true;
    RunReport r = runSolve(p, o);
    ASSERT_TRUE(r.ok()) << r.error << " " << (r.violations.empty() ? "" : r.violations[0]);
    EXPECT_EQ(r.cost, r.oracleCost);
  }
}

TEST(RunSolve, InfeasibleInstance) {
  Rng rng(62);
  for (Method m : {Method::Vanilla, Method::Eleven8, Method::Four3, Method::Oracle}) {
    Problem p = makeInfeasible(randomFeasibleInstance(rng, 8, 20, 10), rng);
    SolveOptions o;
    o.method = m;
    o.verify = true;
    RunReport r = runSolve(p, o);
    EXPECT_EQ(r.status, "infeasible") << r.error;
    EXPECT_EQ(r.exitCode(), 1);
    EXPECT_FALSE(r.cost.has_value());
    EXPECT_TRUE(r.violations.empty());
  }
}

TEST(RunSolve, EmptyInstance) {
  Problem p;
  p.n = 2;
  p.demand = {0, 0};
  EXPECT_EQ(runSolve(p).cost, 0);
  p.demand = {-1, 1};
  EXPECT_EQ(runSolve(p).status, "infeasible");
}

TEST(RunSolve, ErrorsCarryTheirStage) {
  Problem p;
  p.n = 4;
  p.arcs = {{0, 1, 1}, {2, 3, 1}};
  p.demand = {0, 0, 0, 0};
  RunReport r = runSolve(p);
  EXPECT_EQ(r.status, "error");
  EXPECT_EQ(r.errorStage, "validate");
  EXPECT_EQ(r.exitCode(), 2);

  SolveOptions o;
  o.maxIterations = 3;
  RunReport capped = runSolve(triangle(), o);
  EXPECT_EQ(capped.status, "error");
  EXPECT_EQ(capped.errorStage, "vanilla");
}

TEST(RunSolve, CostScalingGivesTheSameCost) {
  Rng rng(63);
  for (Method m : {Method::Vanilla, Method::Eleven8, Method::Four3}) {
    for (int i = 0; i < 4; ++i) {
      Problem p = randomFeasibleInstance(rng, 10, 30, 5000);
      SolveOptions direct;
      direct.method = m;
      SolveOptions scaled = direct;
      scaled.scalingThreshold = 4;
      RunReport a = runSolve(p, direct), b = runSolve(p, scaled);
      ASSERT_TRUE(a.ok()) << a.error;
      ASSERT_TRUE(b.ok()) << b.error;
      EXPECT_EQ(a.scalingPhases, 1);
      EXPECT_GT(b.scalingPhases, 5);
      EXPECT_EQ(a.cost, b.cost);
      EXPECT_EQ(a.cost, sspSolve(p).cost);
    }
  }
}

TEST(RunSolve, LargeCostsEngageScalingByDefault) {
  Rng rng(64);
  Problem p = randomFeasibleInstance(rng, 6, 12, 1000000);
  SolveOptions o;
  o.verify = true;
  RunReport r = runSolve(p, o);
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_GT(r.scalingPhases, 1);
  EXPECT_EQ(r.cost, r.oracleCost);
}

TEST(RunReport, JsonFields) {
  RunReport r = runSolve(triangle());
  nlohmann::json j = r.toJson(false);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["cost"], 2);
  EXPECT_EQ(j["n"], 3);
  EXPECT_FALSE(j.contains("seconds"));
  EXPECT_TRUE(r.toJson().contains("seconds"));
  EXPECT_NE(r.table().find("optimal"), std::string::npos);
}

TEST(RunBench, EmptySizeList) {
  BenchOptions b;
  EXPECT_TRUE(runBench(b).empty());
}

TEST(RunBench, SameSeedSameReport) {
  BenchOptions b;
  b.sizes = {20, 40};
  b.instancesPerSize = 2;
  b.seed = 5;
  auto x = runBench(b), y = runBench(b);
  ASSERT_EQ(x.size(), 6u);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].dump(), y[i].dump());
}

TEST(RunBench, VanillaIterationsGrowLikeSqrtM) {
  BenchOptions b;
  b.sizes = {64, 128, 256};
  b.instancesPerSize = 3;
  for (const auto& line : runBench(b)) {
    if (!line.contains("ratio")) continue;
    const double ratio = line["ratio"], expect = line["sqrt_size_ratio"];
    EXPECT_NEAR(ratio, expect, 0.35 * expect) << "size " << line["size"];
  }
}
