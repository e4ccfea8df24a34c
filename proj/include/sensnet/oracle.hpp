#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sensnet/network.hpp"

namespace sensnet {

// Largest joint the oracle will enumerate.
inline constexpr std::size_t kJointStateLimit = std::size_t{1} << 22;

// Full joint over a set of simple nodes. Flat index is mixed radix over
// `axes`, last axis least significant. joint() orders axes topologically.
struct JointTable {
  std::vector<NodeId> axes;
  std::vector<std::size_t> radix;
  Vector values;

  std::optional<std::size_t> axis_of(NodeId node) const;
  std::size_t stride(std::size_t axis) const;
};

JointTable joint(const BeliefNetwork& net);

JointTable marginalize_out(const JointTable& table, NodeId node);

// Zeroes states inconsistent with the evidence and renormalizes.
// Throws kZeroProbability if the evidence is impossible.
JointTable condition(const JointTable& table, const BeliefNetwork& net,
                     const Evidence& evidence);

// Marginal over `nodes` in the given order, same radix convention.
Vector marginal_over(const JointTable& table, const std::vector<NodeId>& nodes);

// Marginal over every state (pruned or not) of a compound space.
Vector space_marginal(const JointTable& table, const BeliefNetwork& net,
                      const StateSpace& space);

// Returns p(X_j | X_i) and p(X_i). Throws kZeroProbability when some state of
// X_i has zero marginal.
std::pair<ConditionalMatrix, Distribution> arc_reverse_cpt(const ConditionalMatrix& p_ij,
                                                           const Distribution& p_j);

Distribution posterior(const BeliefNetwork& net, const Evidence& evidence, NodeId query);

// p(child | parent) over the retained states of both spaces. Throws
// kZeroProbability when a retained parent state has no mass.
ConditionalMatrix pairwise_conditional(const JointTable& table, const BeliefNetwork& net,
                                       const StateSpace& child_set,
                                       const StateSpace& parent_set);
ConditionalMatrix pairwise_conditional(const BeliefNetwork& net, const StateSpace& child_set,
                                       const StateSpace& parent_set);

}  // namespace sensnet
