#include <gtest/gtest.h>

#include "circflow/errors.hpp"
#include "circflow/oracle.hpp"
#include "support.hpp"

using namespace circflow;
using namespace circflow::testing;

TEST(Ssp, SingleArc) {
  ExactSolution s = sspSolve(singleArc(5));
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_EQ(s.cost, 5);
  EXPECT_EQ(s.flow, (std::vector<int>{1}));
}

TEST(Ssp, TriangleTakesTwoHopPath) {
  ExactSolution s = sspSolve(triangle());
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_EQ(s.cost, 2);
  EXPECT_EQ(s.flow, (std::vector<int>{1, 1, 0}));
  EXPECT_TRUE(certifiesOptimal(triangle(), s.flow, s.potentials));
}

TEST(Ssp, TwoUnitsOverOneArcIsInfeasible) {
  Problem p = singleArc(5);
  p.demand = {-2, 2};
  EXPECT_EQ(sspSolve(p).status, Status::Infeasible);
  EXPECT_EQ(bruteForceSolve(p).status, Status::Infeasible);
}

TEST(Ssp, NegativeCyclesAreSaturated) {
  Problem p = twoCycle(-3, 1);
  ExactSolution s = sspSolve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_EQ(s.cost, -2);
}

TEST(BruteForce, EmptyAndTriangle) {
  Problem p;
  p.n = 1;
  p.demand = {0};
  ExactSolution e = bruteForceSolve(p);
  EXPECT_EQ(e.status, Status::Optimal);
  EXPECT_EQ(e.cost, 0);
  EXPECT_EQ(bruteForceSolve(triangle()).cost, 2);
}

TEST(BruteForce, SizeLimit) {
  Rng rng(1);
  EXPECT_THROW(bruteForceSolve(randomFeasibleInstance(rng, 6, 21, 3)), SizeError);
}

TEST(Ssp, AgreesWithBruteForce) {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    Problem p = randomFeasibleInstance(rng, 2 + i % 7, 1 + i % 14, 10);
    if (i % 4 == 3) p = shiftDemand(p, rng, 2);
    ExactSolution a = sspSolve(p), b = bruteForceSolve(p);
    ASSERT_EQ(a.status, b.status) << "instance " << i;
    if (a.status == Status::Optimal) {
      EXPECT_EQ(a.cost, b.cost) << "instance " << i;
      EXPECT_EQ(flowCost(p, a.flow), a.cost);
      EXPECT_EQ(divergenceOf(p, a.flow), p.demand);
      EXPECT_TRUE(certifiesOptimal(p, a.flow, a.potentials));
    }
  }
}

TEST(CancelNegativeCycles, ReachesCertifiableFlow) {
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    Problem p = randomFeasibleInstance(rng, 8, 24, 10);
    ExactSolution opt = sspSolve(p);
    // the most expensive feasible flow is a convenient bad start
    Problem rev = p;
    for (auto& a : rev.arcs) a.cost = -a.cost;
    std::vector<int> flow = sspSolve(rev).flow;
    cancelNegativeCycles(p, flow);
    EXPECT_EQ(divergenceOf(p, flow), p.demand);
    EXPECT_EQ(flowCost(p, flow), opt.cost);
    EXPECT_FALSE(residualPotentials(p, flow).empty());
  }
}

TEST(AugmentShortestPaths, RoutesFromZeroFlow) {
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    Problem p = randomFeasibleInstance(rng, 8, 24, 10);
    for (auto& a : p.arcs) a.cost = std::llabs(a.cost);
    std::vector<int> flow(p.m(), 0);
    std::vector<long long> pot(p.n, 0);
    int phases = augmentShortestPaths(p, flow, pot, true);
    ASSERT_GE(phases, 0);
    EXPECT_EQ(flowCost(p, flow), sspSolve(p).cost);
    EXPECT_TRUE(certifiesOptimal(p, flow, pot));
  }
}

TEST(AugmentShortestPaths, CheckDualsRejectsBadPotentials) {
  Problem p = singleArc(-1);
  std::vector<int> flow(1, 0);
  std::vector<long long> pot(2, 0);
  EXPECT_THROW(augmentShortestPaths(p, flow, pot, true), ContractViolation);
}
