#include <gtest/gtest.h>

#include "circflow/errors.hpp"
#include "circflow/graph.hpp"
#include "support.hpp"

using namespace circflow;
using circflow::testing::triangle;

TEST(ParseDimacs, SingleArc) {
  Problem p = parseDimacs("p min 2 1\nn 1 1\nn 2 -1\na 1 2 0 1 5\n");
  EXPECT_EQ(p.n, 2);
  ASSERT_EQ(p.m(), 1);
  EXPECT_EQ(p.arcs[0], (Arc{0, 1, 5}));
  EXPECT_EQ(p.demand, (std::vector<long long>{-1, 1}));
}

TEST(ParseDimacs, NoArcsZeroDemand) {
  Problem p = parseDimacs("c nothing here\np min 3 0\n");
  EXPECT_EQ(p.m(), 0);
  EXPECT_EQ(p.demand, (std::vector<long long>{0, 0, 0}));
}

TEST(ParseDimacs, RejectsCapacityTwo) {
  EXPECT_THROW(parseDimacs("p min 2 1\na 1 2 0 2 5\n"), UnsupportedCapacityError);
  EXPECT_THROW(parseDimacs("p min 2 1\na 1 2 1 1 5\n"), UnsupportedCapacityError);
}

TEST(ParseDimacs, ReportsLineOfBadInput) {
  try {
    parseDimacs("p min 2 1\nn 1 1\nq 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parseDimacs("p min 2 2\na 1 2 0 1 5\n"), ParseError);
  EXPECT_THROW(parseDimacs("a 1 2 0 1 5\n"), ParseError);
  EXPECT_THROW(parseDimacs("p min 2 1\na 1 3 0 1 5\n"), ParseError);
}

TEST(ParseDimacs, UnbalancedSupplyFailsValidation) {
  EXPECT_THROW(parseDimacs("p min 2 1\nn 1 1\na 1 2 0 1 5\n"), ValidationError);
}

TEST(ParseDimacs, RoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    Problem p = randomFeasibleInstance(rng, 8, 20, 9);
    EXPECT_EQ(parseDimacs(writeDimacs(p)), p);
    EXPECT_EQ(problemFromJson(toJson(p)), p);
  }
}

TEST(Validate, SelfLoopAndConnectivity) {
  Problem p = triangle();
  p.arcs.push_back({1, 1, 0});
  EXPECT_THROW(validate(p), ValidationError);
  Problem q;
  q.n = 4;
  q.arcs = {{0, 1, 1}, {2, 3, 1}};
  q.demand = {0, 0, 0, 0};
  EXPECT_NO_THROW(validate(q));
  EXPECT_THROW(validateForSolve(q), ValidationError);
  EXPECT_THROW(validate(triangle(), 2), ValidationError);
}

TEST(Incidence, GradientAndDivergenceAreAdjoint) {
  Rng rng(3);
  Problem p = randomFeasibleInstance(rng, 10, 30, 5);
  Digraph g = Digraph::of(p);
  Eigen::VectorXd phi = Eigen::VectorXd::Random(g.n), x = Eigen::VectorXd::Random(g.m());
  EXPECT_NEAR(gradientOf(g, phi).dot(x), phi.dot(divergenceOf(g, x)), 1e-12);
}

TEST(AugmentForInit, SingleArc) {
  Problem p;
  p.n = 2;
  p.arcs = {{0, 1, 4}};
  p.demand = {-1, 1};
  AugmentedProblem ap = augmentForInit(p);
  ASSERT_EQ(ap.combined.m(), 3);
  EXPECT_EQ(ap.v0, 2);
  EXPECT_EQ(ap.cInf, 2 * 4);
  // the tail is short of outflow and the head short of inflow at f = 1/2
  EXPECT_EQ(ap.combined.arcs[1], (Arc{0, 2, ap.cInf}));
  EXPECT_EQ(ap.combined.arcs[2], (Arc{2, 1, ap.cInf}));
  EXPECT_EQ(ap.auxiliary, (std::vector<char>{0, 1, 1}));
}

TEST(AugmentForInit, BalancedTwoCycleNeedsNothing) {
  AugmentedProblem ap = augmentForInit(circflow::testing::twoCycle(1, 2));
  EXPECT_EQ(ap.combined.m(), 2);
  EXPECT_EQ(ap.v0, -1);
}

TEST(AugmentForInit, HalfFlowRoutesDemand) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Problem p = randomFeasibleInstance(rng, 3 + i % 12, 20 + i, 10);
    AugmentedProblem ap = augmentForInit(p);
    Digraph g = Digraph::of(ap.combined);
    Eigen::VectorXd d = divergenceOf(g, Eigen::VectorXd::Constant(g.m(), 0.5));
    for (int v = 0; v < g.n; ++v) EXPECT_DOUBLE_EQ(d[v], static_cast<double>(ap.combined.demand[v]));
    long long d1 = 0;
    for (long long d : p.demand) d1 += std::llabs(d);
    EXPECT_LE(ap.combined.m(), 3LL * p.m() + 2 * d1);
    EXPECT_GT(ap.cInf, p.m() * std::max<long long>(p.maxAbsCost(), 1));
  }
}

TEST(StarGraph, SingleArcUnitWeights) {
  Problem p = circflow::testing::singleArc(1);
  StarGraph s = buildStarGraph(p, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
  EXPECT_EQ(s.count, (std::vector<long long>{2, 2}));
  EXPECT_EQ(s.totalEdges, 4);
  EXPECT_EQ(s.center, 2);
}

TEST(StarGraph, FractionalDegreeRoundsUp) {
  Problem p = circflow::testing::singleArc(1);
  StarGraph s = buildStarGraph(p, Eigen::VectorXd::Constant(1, 0.6), Eigen::VectorXd::Constant(1, 0.6));
  EXPECT_EQ(s.count, (std::vector<long long>{2, 2}));
}

TEST(StarGraph, EdgeCountWithinThreeWeightSum) {
  Rng rng(5);
  std::uniform_real_distribution<double> w(1, 40);
  for (int i = 0; i < 30; ++i) {
    Problem p = randomFeasibleInstance(rng, 12, 40, 3);
    Eigen::VectorXd wp(p.m()), wm(p.m());
    for (int e = 0; e < p.m(); ++e) {
      wp[e] = w(rng);
      wm[e] = w(rng);
    }
    StarGraph s = buildStarGraph(p, wp, wm);
    EXPECT_LE(s.totalEdges, 3 * (wp.sum() + wm.sum()));
  }
}
