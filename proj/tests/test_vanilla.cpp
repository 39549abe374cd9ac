#include <gtest/gtest.h>

#include <cmath>

#include "circflow/errors.hpp"
#include "circflow/oracle.hpp"
#include "circflow/vanilla.hpp"
#include "support.hpp"

using namespace circflow;
using namespace circflow::testing;

namespace {

FlowState centralRandom(Rng& rng, int n, int m, long long maxCost, IpmMonitor* mon = nullptr) {
  return initialize(augmentForInit(randomFeasibleInstance(rng, n, m, maxCost)), {}, mon);
}

double costNorm(const Problem& p) {
  double s = 0;
  for (const auto& a : p.arcs) s += static_cast<double>(a.cost) * a.cost;
  return std::sqrt(s);
}

}  // namespace

TEST(ComputeResidual, Examples) {
  FlowState s = makeHalfState(std::make_shared<Problem>(singleArc(0)), 1.0);
  EXPECT_EQ(computeResidual(s, 0.0)[0], 0.0);
  EXPECT_EQ(computeResidual(s, 0.3)[0], 0.0);
  s.wMinus[0] = 2;
  s.sMinus[0] = 0.25;
  s.sPlus[0] = 0.75;
  EXPECT_NEAR(computeResidual(s, 0.1)[0], -2.0 / 3.0, 1e-15);
}

TEST(Initialize, ZeroCostIsAlreadyCentral) {
  Problem p = twoCycle();
  FlowState s = initializeProblem(std::make_shared<Problem>(p));
  EXPECT_EQ(s.wPlus, Eigen::VectorXd::Ones(2));
  EXPECT_EQ(s.sMinus, Eigen::VectorXd::Constant(2, 0.5));
  EXPECT_EQ(residualEnergy(s), 0.0);
}

TEST(Initialize, StartingPredictorEnergy) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    AugmentedProblem ap = augmentForInit(randomFeasibleInstance(rng, 10, 30, 20));
    FlowState s = makeHalfState(std::make_shared<Problem>(ap.combined), costNorm(ap.combined));
    EXPECT_LE(residualEnergy(s), 0.125 + 1e-12);
  }
}

TEST(Initialize, PostConditions) {
  Rng rng(32);
  for (int i = 0; i < 20; ++i) {
    AugmentedProblem ap = augmentForInit(randomFeasibleInstance(rng, 5 + i, 10 + 3 * i, 20));
    FlowState s = initialize(ap);
    const int m = ap.combined.m();
    EXPECT_LE(s.mu, 2 * costNorm(ap.combined));
    EXPECT_GE(s.wPlus.minCoeff(), 1.0);
    EXPECT_GE(s.wMinus.minCoeff(), 1.0);
    EXPECT_LE(s.weightSum(), 2.0 * m + 1);
    EXPECT_LE(centralityError(s), 1e-8);
    EXPECT_LE(dualityGap(s).relativeDeviation, 1e-9);
  }
}

TEST(CorrectToCentral, CentralStateIsLeftAlone) {
  Rng rng(33);
  FlowState s = centralRandom(rng, 10, 30, 10);
  FlowState t = s;
  CorrectionResult r = correctToCentral(t);
  EXPECT_EQ(r.steps, 0);
  EXPECT_LT((t.sMinus - s.sMinus).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((t.wPlus - s.wPlus).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_NEAR(t.mu, s.mu, 1e-6 * s.mu);
}

TEST(CorrectToCentral, EnergyContractsQuadratically) {
  Rng rng(34);
  int recorded = 0;
  for (int i = 0; i < 100; ++i) {
    FlowState s = centralRandom(rng, 6 + i % 10, 15 + i % 30, 20);
    s.mu /= 1 + 0.9 / std::sqrt(2 * s.weightSum());
    IpmMonitor mon;
    CorrectionResult r = correctToCentral(s, nullptr, {}, &mon);
    EXPECT_LE(r.steps, 10);
    for (auto [e0, e1] : mon.contraction) {
      if (e0 > 0.25) continue;
      EXPECT_LE(e1, 2 * e0 * e0 + 1e-12);
      ++recorded;
    }
    EXPECT_LE(centralityError(s), 1e-8);
  }
  EXPECT_GT(recorded, 100);
}

TEST(CorrectToCentral, RefusesLargeResidual) {
  Rng rng(35);
  FlowState s = centralRandom(rng, 10, 30, 10);
  s.mu /= 10;
  EXPECT_THROW(correctToCentral(s), ContractViolation);
}

TEST(PerfectCorrection, TwoCycleWeights) {
  // w = 1/4 and f = 1/2 give r = 2 per arc; the residual (0.2, 0) is removed by the
  // circulation 1/20, i.e. rho+ = 0.1 and rho- = -0.1 on both arcs.
  FlowState s = makeHalfState(std::make_shared<Problem>(twoCycle(-1, 0)), 5.0);
  s.wPlus.setConstant(0.25);
  s.wMinus.setConstant(0.25);
  CorrectionResult r = perfectCorrection(s);
  EXPECT_NEAR(r.rhoInf, 0.1, 1e-12);
  EXPECT_NEAR(s.wPlus[0], 0.25 * 1.1 / 0.9, 1e-12);
  EXPECT_NEAR(s.wPlus[1], 0.25 * 1.1 / 0.9, 1e-12);
  EXPECT_NEAR(s.wMinus[0], 0.25, 1e-12);
  EXPECT_NEAR(s.mu, 4.5, 1e-12);
  EXPECT_EQ(s.sMinus, Eigen::VectorXd::Constant(2, 0.5));
  EXPECT_LE(centralityError(s), 1e-9);
}

TEST(PerfectCorrection, ZeroResidualChangesNothing) {
  FlowState s = makeHalfState(std::make_shared<Problem>(twoCycle()), 3.0);
  perfectCorrection(s);
  EXPECT_EQ(s.wPlus, Eigen::VectorXd::Ones(2));
  EXPECT_EQ(s.mu, 3.0);
}

TEST(PerfectCorrection, RandomSmallResiduals) {
  Rng rng(36);
  for (int i = 0; i < 20; ++i) {
    FlowState s = centralRandom(rng, 8, 25, 20);
    s.mu /= 1.002;
    Correction c = correctionFlow(s, -centralityGradient(s));
    const double k = 1 - c.rhoInf();
    Eigen::VectorXd wp = s.wPlus.cwiseProduct((1 + c.rhoPlus.array()).matrix()) / k;
    const double mu = s.mu * k;
    perfectCorrection(s);
    EXPECT_LT((s.wPlus - wp).lpNorm<Eigen::Infinity>(), 1e-12 * wp.maxCoeff());
    EXPECT_NEAR(s.mu, mu, 1e-14 * mu);
    EXPECT_LE(centralityError(s), 1e-9);
  }
}

TEST(VanillaSolve, ReturnsAtOnceWhenGapIsSmall) {
  Rng rng(37);
  FlowState s = centralRandom(rng, 8, 20, 5);
  VanillaStats st = vanillaSolve(s, 2 * s.mu * s.weightSum());
  EXPECT_EQ(st.iterations, 0);
}

TEST(VanillaSolve, Triangle) {
  AugmentedProblem ap = augmentForInit(triangle());
  FlowState s = initialize(ap);
  IpmMonitor mon;
  VanillaStats st = vanillaSolve(s, 1e-6, {}, &mon);
  EXPECT_LE(st.finalGap, 1e-6);
  std::vector<int> rounded(3);
  for (int e = 0; e < 3; ++e) rounded[e] = s.sMinus[e] >= 0.5;
  EXPECT_EQ(flowCost(triangle(), rounded), 2);
  for (double e : mon.predictorEnergies) EXPECT_LE(e, 0.25 + 1e-9);
  for (double g : mon.gapDeviations) EXPECT_LE(g, 1e-9);
  EXPECT_TRUE(mon.weightsMonotone);
}

TEST(VanillaSolve, MuShrinksEveryIteration) {
  Rng rng(38);
  FlowState s = centralRandom(rng, 12, 40, 20);
  IpmMonitor mon;
  VanillaStats st = vanillaSolve(s, 1e-3, {}, &mon);
  ASSERT_EQ(static_cast<int>(mon.muRatios.size()), st.iterations);
  for (double r : mon.muRatios) EXPECT_GT(r, 1.0);
  EXPECT_LE(mon.maxWeightSum, 3.0 * s.m());
}
