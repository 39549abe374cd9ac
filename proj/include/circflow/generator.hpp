#pragma once

#include <cstdint>
#include <random>

#include "circflow/graph.hpp"

namespace circflow {

using Rng = std::mt19937_64;

// Connected random instance (random spanning tree plus extra arcs, parallel arcs allowed).
// Demand is the divergence of a random 0/1 flow, so the instance is feasible.
Problem randomFeasibleInstance(Rng& rng, int n, int m, long long maxCost,
                               double flowDensity = 0.3);

// Moves `units` demand units between random vertex pairs. The result may be infeasible.
Problem shiftDemand(const Problem& p, Rng& rng, int units);

// Same graph, demand pushed past the in-degree of one vertex: always infeasible.
Problem makeInfeasible(const Problem& p, Rng& rng);

}  // namespace circflow
