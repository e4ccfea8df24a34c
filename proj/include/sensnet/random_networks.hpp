#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "sensnet/compiler.hpp"
#include "sensnet/network.hpp"

namespace sensnet {

using Rng = std::mt19937_64;

// Column-stochastic rows x cols matrix. With `distinct` > 0 only that many
// different columns appear.
Matrix random_cpt(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index distinct = 0);

// Distribution with every entry at least `floor` before normalization.
Vector random_distribution(Rng& rng, Eigen::Index size, double floor = 0.0);

// Binary DAG in which each node after the first has one random earlier parent.
BeliefNetwork random_tree_network(Rng& rng, std::size_t nodes);

// Random DAG where each node gets up to `max_parents` earlier parents.
BeliefNetwork random_dag(Rng& rng, std::size_t nodes, std::size_t max_parents,
                         std::size_t max_states = 2);

// Singleton clusters along the tree, with up to `max_groups` random connected
// pairs or triples merged into compound nodes.
ClusterPlan random_grouping_plan(Rng& rng, const BeliefNetwork& tree_net, std::size_t max_groups);

// Binary chain x_1 -> ... -> x_n with every |S| < alpha in both directions and
// every p(not i)p(i) > eta.
BeliefNetwork random_decay_chain(Rng& rng, std::size_t length, double alpha, double eta);

// Up to `max_size` distinct variables with uniformly drawn states. The result
// may have zero probability; callers that need it positive check and redraw.
Evidence random_evidence(Rng& rng, const BeliefNetwork& net, std::size_t max_size);

// Runs fn(i) for i in [0, n) on up to `threads` worker threads (0 = hardware).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

}  // namespace sensnet
