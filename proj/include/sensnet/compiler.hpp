#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sensnet/network.hpp"
#include "sensnet/tree.hpp"

namespace sensnet {

struct UndirectedGraph {
  std::vector<std::set<std::size_t>> adjacency;

  std::size_t size() const { return adjacency.size(); }
  bool has_edge(std::size_t a, std::size_t b) const { return adjacency.at(a).count(b) != 0; }
  void add_edge(std::size_t a, std::size_t b);
  std::size_t edge_count() const;
};

UndirectedGraph moralize(const BeliefNetwork& net);

// Clusters of simple-node labels; tree_edges are (child, parent) cluster indices.
struct ClusterPlan {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> clusters;
  std::vector<std::pair<std::size_t, std::size_t>> tree_edges;
};

// Tree-shaped DAGs (each node with at most one parent) map to singleton
// clusters joined along the DAG's edges. Anything else goes through min-fill
// triangulation, maximal cliques and a maximum-weight spanning tree on
// separator sizes.
ClusterPlan plan_clusters(const UndirectedGraph& moral, const BeliefNetwork& net);

// Violations of: non-empty known clusters, coverage, tree shape, running
// intersection, and the separation property every compiled tree relies on
// (for each cluster k, the variables beyond each neighbour are independent of
// the rest given the variables of k).
std::vector<std::string> check_plan(const ClusterPlan& plan, const BeliefNetwork& net);

bool covers_families(const ClusterPlan& plan, const BeliefNetwork& net);

// X and Y d-separated by Z in the DAG.
bool d_separated(const BeliefNetwork& net, const std::set<std::size_t>& x,
                 const std::set<std::size_t>& y, const std::set<std::size_t>& z);

struct EdgeReport {
  std::string name;
  std::size_t child_states = 0;
  std::size_t parent_states = 0;
  std::size_t rank = 0;

  std::size_t dense_size() const { return child_states * parent_states; }
  std::size_t qr_size() const { return (child_states + parent_states) * rank; }
  // dense / QR; infinite for an independent (rank-0) edge.
  double compression() const;
};

struct NodePruning {
  std::string name;
  std::vector<std::size_t> pruned;
};

struct CompileReport {
  std::vector<EdgeReport> edges;
  std::vector<NodePruning> nodes;

  std::size_t pruned_state_count() const;
};

struct CompileOptions {
  double rank_tolerance = kRankTolerance;
  double prune_threshold = 1e-12;
};

CompileReport report_for(const TreeNetwork& tree);

std::pair<TreeNetwork, CompileReport> compile(const BeliefNetwork& net, const ClusterPlan& plan,
                                              const CompileOptions& options = {});

// Same result as compile() with the singleton plan, for DAGs where every node
// has at most one parent: priors by forward propagation, edge conditionals are
// the CPTs. No enumeration, so it scales to long chains. Throws kValidation
// for other DAGs or when a prior has a zero state.
TreeNetwork compile_tree_shaped(const BeliefNetwork& net, const CompileOptions& options = {});

// Builds a tree from priors and factors without the oracle. Factor rows are
// projected onto zero-sum vectors first to absorb rounding in hand-entered
// tables; backward factors may be omitted.
TreeNetwork accept_precompiled(std::vector<Variable> variables, std::vector<CompoundNode> nodes,
                               std::vector<TreeEdge> edges,
                               double tol = kConsistencyTolerance);

}  // namespace sensnet
