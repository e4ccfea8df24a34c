#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sensnet/types.hpp"

namespace sensnet {

// States of a (possibly compound) node: the joint assignments of its member
// simple nodes, enumerated with the last member least significant. For binary
// members this is sum_i 2^(i-1) x_i with i counted from the right. Pruned
// states keep their original index in `pruned_states()`; matrices and
// distributions are laid out over the retained states only, in original order.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(std::vector<std::string> members, std::vector<std::size_t> radix);

  const std::vector<std::string>& members() const { return members_; }
  const std::vector<std::size_t>& radix() const { return radix_; }
  std::size_t full_cardinality() const { return full_; }
  std::size_t cardinality() const { return retained_.size(); }
  const std::vector<std::size_t>& retained() const { return retained_; }
  std::vector<std::size_t> pruned_states() const;

  // Drops the given original indices. Throws if that would leave no state.
  void prune(const std::vector<std::size_t>& original_indices);

  std::optional<std::size_t> member_position(const std::string& label) const;
  std::size_t member_value(std::size_t original, std::size_t position) const;
  std::size_t original_index(const std::vector<std::size_t>& member_values) const;
  std::optional<std::size_t> compact_index(std::size_t original) const;
  std::size_t original_of(std::size_t compact) const { return retained_.at(compact); }

  bool operator==(const StateSpace&) const = default;

 private:
  std::vector<std::string> members_;
  std::vector<std::size_t> radix_;
  std::size_t full_ = 1;
  std::vector<std::size_t> retained_;
};

// Compact index of a full assignment of the space's members. Throws
// kPrunedState for a discarded state and kUnknownLabel/kValidation for an
// incomplete or foreign assignment.
std::size_t state_index(const Assignment& assignment, const StateSpace& space);

// Zeroes every state inconsistent with `partial` and renormalizes.
// Throws kZeroProbability when no consistent state has mass.
Distribution restrict_distribution(const Distribution& d, const StateSpace& space,
                                   const Assignment& partial);

// Marginal of one member over a compound distribution.
Distribution member_marginal(const Distribution& d, const StateSpace& space,
                             std::size_t position);

// A DAG of simple nodes with one CPT per node. The CPT of node i is a
// |X_i| x prod|Pa| matrix; column q is the parent configuration with the last
// listed parent least significant.
class BeliefNetwork {
 public:
  NodeId add_node(std::string label, std::vector<std::string> states);
  void set_parents(NodeId node, std::vector<NodeId> parents);
  void set_cpt(NodeId node, Matrix cpt);

  std::size_t size() const { return vars_.size(); }
  const Variable& variable(NodeId id) const { return vars_.at(id.index()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<NodeId>& parents(NodeId id) const { return parents_.at(id.index()); }
  const Matrix& cpt(NodeId id) const { return cpts_.at(id.index()); }
  std::size_t parent_configurations(NodeId id) const;
  std::optional<NodeId> find(const std::string& label) const;
  NodeId require(const std::string& label) const;

  // Throws kValidation on a cycle.
  std::vector<NodeId> topological_order() const;
  bool is_acyclic() const;

  bool operator==(const BeliefNetwork&) const;

 private:
  std::vector<Variable> vars_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<Matrix> cpts_;
};

// Empty iff acyclic, dimensions consistent, and every CPT column sums to 1.
std::vector<std::string> validate_network(const BeliefNetwork& net);

}  // namespace sensnet
