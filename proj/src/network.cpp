#include "sensnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "sensnet/error.hpp"

namespace sensnet {

StateSpace::StateSpace(std::vector<std::string> members, std::vector<std::size_t> radix)
    : members_(std::move(members)), radix_(std::move(radix)) {
  if (members_.size() != radix_.size()) {
    throw Error(ErrorKind::kDimension, "state space members and radix differ in length");
  }
  for (std::size_t r : radix_) {
    if (r == 0) throw Error(ErrorKind::kDimension, "member with zero states");
    full_ *= r;
  }
  retained_.resize(full_);
  for (std::size_t i = 0; i < full_; ++i) retained_[i] = i;
}

std::vector<std::size_t> StateSpace::pruned_states() const {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < full_; ++i) {
    if (k < retained_.size() && retained_[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

void StateSpace::prune(const std::vector<std::size_t>& original_indices) {
  std::vector<std::size_t> kept;
  kept.reserve(retained_.size());
  for (std::size_t s : retained_) {
    if (std::find(original_indices.begin(), original_indices.end(), s) ==
        original_indices.end()) {
      kept.push_back(s);
    }
  }
  for (std::size_t s : original_indices) {
    if (s >= full_) {
      throw Error(ErrorKind::kDimension, "pruned state " + std::to_string(s) +
                                             " out of range");
    }
  }
  if (kept.empty()) throw Error(ErrorKind::kValidation, "pruning removes every state");
  retained_ = std::move(kept);
}

std::optional<std::size_t> StateSpace::member_position(const std::string& label) const {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i] == label) return i;
  }
  return std::nullopt;
}

std::size_t StateSpace::member_value(std::size_t original, std::size_t position) const {
  std::size_t stride = 1;
  for (std::size_t k = members_.size(); k-- > position + 1;) stride *= radix_[k];
  return (original / stride) % radix_[position];
}

std::size_t StateSpace::original_index(const std::vector<std::size_t>& member_values) const {
  if (member_values.size() != members_.size()) {
    throw Error(ErrorKind::kDimension, "assignment length does not match state space");
  }
  std::size_t idx = 0;
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (member_values[k] >= radix_[k]) {
      throw Error(ErrorKind::kUnknownLabel, "state value out of range for " + members_[k]);
    }
    idx = idx * radix_[k] + member_values[k];
  }
  return idx;
}

std::optional<std::size_t> StateSpace::compact_index(std::size_t original) const {
  auto it = std::lower_bound(retained_.begin(), retained_.end(), original);
  if (it == retained_.end() || *it != original) return std::nullopt;
  return static_cast<std::size_t>(it - retained_.begin());
}

std::size_t state_index(const Assignment& assignment, const StateSpace& space) {
  std::vector<std::size_t> values(space.members().size());
  for (std::size_t k = 0; k < space.members().size(); ++k) {
    auto it = assignment.find(space.members()[k]);
    if (it == assignment.end()) {
      throw Error(ErrorKind::kValidation,
                  "assignment does not cover member " + space.members()[k]);
    }
    values[k] = it->second;
  }
  for (const auto& [label, v] : assignment) {
    if (!space.member_position(label)) {
      throw Error(ErrorKind::kUnknownLabel, label + " is not a member of this node");
    }
  }
  std::size_t original = space.original_index(values);
  auto compact = space.compact_index(original);
  if (!compact) {
    throw Error(ErrorKind::kPrunedState,
                "assignment maps to pruned state " + std::to_string(original));
  }
  return *compact;
}

Distribution restrict_distribution(const Distribution& d, const StateSpace& space,
                                   const Assignment& partial) {
  if (d.size() != space.cardinality()) {
    throw Error(ErrorKind::kDimension, "distribution size does not match state space");
  }
  std::vector<std::pair<std::size_t, std::size_t>> constraints;
  for (const auto& [label, value] : partial) {
    auto pos = space.member_position(label);
    if (!pos) throw Error(ErrorKind::kUnknownLabel, label + " is not a member of this node");
    if (value >= space.radix()[*pos]) {
      throw Error(ErrorKind::kUnknownLabel, "state value out of range for " + label);
    }
    constraints.emplace_back(*pos, value);
  }
  Vector out = d.probs();
  for (std::size_t c = 0; c < space.cardinality(); ++c) {
    const std::size_t original = space.original_of(c);
    for (const auto& [pos, value] : constraints) {
      if (space.member_value(original, pos) != value) {
        out(static_cast<Eigen::Index>(c)) = 0.0;
        break;
      }
    }
  }
  const double mass = out.sum();
  if (!(mass > 0.0)) {
    throw Error(ErrorKind::kZeroProbability,
                "instantiation has zero probability under the current distribution");
  }
  return Distribution(out / mass);
}

Distribution member_marginal(const Distribution& d, const StateSpace& space,
                             std::size_t position) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.radix().at(position)));
  for (std::size_t c = 0; c < space.cardinality(); ++c) {
    out(static_cast<Eigen::Index>(space.member_value(space.original_of(c), position))) += d[c];
  }
  return Distribution(std::move(out));
}

NodeId BeliefNetwork::add_node(std::string label, std::vector<std::string> states) {
  if (find(label)) throw Error(ErrorKind::kValidation, "duplicate node " + label);
  if (states.empty()) throw Error(ErrorKind::kValidation, "node " + label + " has no states");
  NodeId id(vars_.size());
  const auto card = static_cast<Eigen::Index>(states.size());
  vars_.push_back(Variable{std::move(label), std::move(states)});
  parents_.emplace_back();
  cpts_.push_back(Matrix::Constant(card, 1, 1.0 / static_cast<double>(card)));
  return id;
}

void BeliefNetwork::set_parents(NodeId node, std::vector<NodeId> parents) {
  for (NodeId p : parents) {
    if (p.index() >= vars_.size()) throw Error(ErrorKind::kUnknownLabel, "unknown parent id");
  }
  parents_.at(node.index()) = std::move(parents);
}

void BeliefNetwork::set_cpt(NodeId node, Matrix cpt) { cpts_.at(node.index()) = std::move(cpt); }

std::size_t BeliefNetwork::parent_configurations(NodeId id) const {
  std::size_t n = 1;
  for (NodeId p : parents(id)) n *= variable(p).cardinality();
  return n;
}

std::optional<NodeId> BeliefNetwork::find(const std::string& label) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].label == label) return NodeId(i);
  }
  return std::nullopt;
}

NodeId BeliefNetwork::require(const std::string& label) const {
  auto id = find(label);
  if (!id) throw Error(ErrorKind::kUnknownLabel, "unknown node " + label);
  return *id;
}

std::vector<NodeId> BeliefNetwork::topological_order() const {
  const std::size_t n = vars_.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId p : parents_[i]) {
      children[p.index()].push_back(i);
      ++indegree[i];
    }
  }
  // Kahn's algorithm, always taking the lowest ready index so the order is
  // deterministic and matches declaration order when possible.
  std::vector<NodeId> order;
  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == n) throw Error(ErrorKind::kValidation, "network contains a directed cycle");
    done[pick] = true;
    order.emplace_back(pick);
    for (std::size_t c : children[pick]) --indegree[c];
  }
  return order;
}

bool BeliefNetwork::is_acyclic() const {
  try {
    topological_order();
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool BeliefNetwork::operator==(const BeliefNetwork& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (vars_[i].label != other.vars_[i].label || vars_[i].states != other.vars_[i].states) {
      return false;
    }
    if (parents_[i] != other.parents_[i]) return false;
    if (cpts_[i].rows() != other.cpts_[i].rows() || cpts_[i].cols() != other.cpts_[i].cols() ||
        cpts_[i] != other.cpts_[i]) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> validate_network(const BeliefNetwork& net) {
  std::vector<std::string> violations;
  if (!net.is_acyclic()) violations.push_back("network contains a directed cycle");
  for (std::size_t i = 0; i < net.size(); ++i) {
    const NodeId id(i);
    const auto& var = net.variable(id);
    const auto& parents = net.parents(id);
    for (std::size_t a = 0; a < parents.size(); ++a) {
      if (parents[a] == id) violations.push_back("node " + var.label + " is its own parent");
      for (std::size_t b = a + 1; b < parents.size(); ++b) {
        if (parents[a] == parents[b]) {
          violations.push_back("node " + var.label + " lists parent " +
                               net.variable(parents[a]).label + " twice");
        }
      }
    }
    const Matrix& cpt = net.cpt(id);
    const auto rows = static_cast<Eigen::Index>(var.cardinality());
    const auto cols = static_cast<Eigen::Index>(net.parent_configurations(id));
    if (cpt.rows() != rows || cpt.cols() != cols) {
      std::ostringstream os;
      os << "CPT of " << var.label << " is " << cpt.rows() << "x" << cpt.cols()
         << ", expected " << rows << "x" << cols;
      violations.push_back(os.str());
      continue;
    }
    for (Eigen::Index q = 0; q < cols; ++q) {
      const double sum = cpt.col(q).sum();
      if (std::abs(sum - 1.0) > kNormTolerance || !cpt.col(q).allFinite()) {
        std::ostringstream os;
        os << "CPT of " << var.label << " column " << q << " sums to " << sum;
        violations.push_back(os.str());
      }
      if (cpt.col(q).minCoeff() < 0.0) {
        std::ostringstream os;
        os << "CPT of " << var.label << " column " << q << " has a negative entry";
        violations.push_back(os.str());
      }
    }
  }
  return violations;
}

}  // namespace sensnet
