#pragma once

#include <optional>
#include <unordered_map>
#include <string>
#include <vector>

#include "sensnet/network.hpp"
#include "sensnet/sensitivity.hpp"

namespace sensnet {

// Tolerance for the mutual-consistency check between the two directions of an edge.
inline constexpr double kConsistencyTolerance = 1e-9;

struct CompoundNode {
  std::string name;
  StateSpace space;
  Distribution prior;
};

// S_{child,parent} with its factor r stored at the parent, and the reverse
// S_{parent,child} with r stored at the child.
struct TreeEdge {
  std::size_t child = 0;
  std::size_t parent = 0;
  QRFactors forward;
  QRFactors backward;

  std::size_t rank() const { return forward.rank(); }
  std::size_t other(std::size_t node) const { return node == child ? parent : child; }
};

struct Adjacent {
  std::size_t neighbor;
  std::size_t edge;
};

struct MemberRef {
  std::size_t node;
  std::size_t position;
};

class TreeNetwork {
 public:
  // Validates shape, dimensions and priors, then checks each edge's stored
  // backward factors against the reversal of its forward factors. The stored
  // backward pair is replaced by the derived one so both directions share a
  // gauge. A missing backward pair (rank-0 placeholder with no columns) is
  // derived without a check.
  static TreeNetwork assemble(std::vector<Variable> variables, std::vector<CompoundNode> nodes,
                              std::vector<TreeEdge> edges,
                              double tol = kConsistencyTolerance);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<CompoundNode>& nodes() const { return nodes_; }
  const CompoundNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const TreeEdge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<Adjacent>& adjacency(std::size_t i) const { return adjacency_.at(i); }
  const std::vector<Variable>& variables() const { return variables_; }

  std::optional<std::size_t> find_node(const std::string& name) const;
  std::size_t require_node(const std::string& name) const;
  const Variable& variable(const std::string& label) const;
  // First node (in declaration order) containing the simple node.
  MemberRef owner(const std::string& label) const;
  std::optional<std::size_t> edge_between(std::size_t a, std::size_t b) const;

  // R stored at `at` for edge e: r x |X_at|; messages from `at` across e use it.
  const Matrix& stored_r(std::size_t at, std::size_t e) const;

  Distribution variable_marginal(const std::string& label, const Distribution& owner_dist) const;
  Distribution variable_prior(const std::string& label) const;

  std::vector<std::size_t> hop_distances(std::size_t from) const;
  // Node sequence from a to b inclusive.
  std::vector<std::size_t> path(std::size_t a, std::size_t b) const;
  bool all_binary() const;

  bool operator==(const TreeNetwork& other) const;

 private:
  std::vector<Variable> variables_;
  std::vector<CompoundNode> nodes_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::unordered_map<std::string, std::size_t> variable_index_;
  std::unordered_map<std::string, MemberRef> owners_;
};

std::string edge_name(const TreeNetwork& tree, std::size_t e);

}  // namespace sensnet
