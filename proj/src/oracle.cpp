#include "sensnet/oracle.hpp"

#include <cmath>
#include <sstream>

#include "sensnet/error.hpp"

namespace sensnet {

namespace {

// Advances a mixed-radix counter, last digit fastest.
void advance(std::vector<std::size_t>& digits, const std::vector<std::size_t>& radix) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < radix[k]) return;
    digits[k] = 0;
  }
}

std::vector<std::size_t> axes_for(const JointTable& table, const BeliefNetwork& net,
                                  const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    auto axis = table.axis_of(net.require(label));
    if (!axis) throw Error(ErrorKind::kUnknownLabel, label + " is not in the joint table");
    out.push_back(*axis);
  }
  return out;
}

// Original state index of `space` at joint position `digits`.
std::size_t space_state(const std::vector<std::size_t>& digits,
                        const std::vector<std::size_t>& axes, const StateSpace& space) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < axes.size(); ++k) idx = idx * space.radix()[k] + digits[axes[k]];
  return idx;
}

}  // namespace

std::optional<std::size_t> JointTable::axis_of(NodeId node) const {
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (axes[k] == node) return k;
  }
  return std::nullopt;
}

std::size_t JointTable::stride(std::size_t axis) const {
  std::size_t s = 1;
  for (std::size_t k = radix.size(); k-- > axis + 1;) s *= radix[k];
  return s;
}

JointTable joint(const BeliefNetwork& net) {
  JointTable table;
  table.axes = net.topological_order();
  std::size_t total = 1;
  for (NodeId id : table.axes) {
    const std::size_t card = net.variable(id).cardinality();
    table.radix.push_back(card);
    if (total > kJointStateLimit / card) {
      throw Error(ErrorKind::kSizeGuard,
                  "joint distribution exceeds " + std::to_string(kJointStateLimit) +
                      " states; use sampled validation");
    }
    total *= card;
  }
  // Per node: axis positions of itself and its parents.
  struct Factor {
    std::size_t self;
    std::vector<std::size_t> parents;
    std::vector<std::size_t> parent_radix;
    const Matrix* cpt;
  };
  std::vector<Factor> factors;
  for (NodeId id : table.axes) {
    Factor f{*table.axis_of(id), {}, {}, &net.cpt(id)};
    for (NodeId p : net.parents(id)) {
      f.parents.push_back(*table.axis_of(p));
      f.parent_radix.push_back(net.variable(p).cardinality());
    }
    factors.push_back(std::move(f));
  }
  table.values.resize(static_cast<Eigen::Index>(total));
  std::vector<std::size_t> digits(table.axes.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double prod = 1.0;
    for (const auto& f : factors) {
      std::size_t col = 0;
      for (std::size_t k = 0; k < f.parents.size(); ++k) {
        col = col * f.parent_radix[k] + digits[f.parents[k]];
      }
      prod *= (*f.cpt)(static_cast<Eigen::Index>(digits[f.self]), static_cast<Eigen::Index>(col));
      if (prod == 0.0) break;
    }
    table.values(static_cast<Eigen::Index>(flat)) = prod;
    advance(digits, table.radix);
  }
  return table;
}

JointTable marginalize_out(const JointTable& table, NodeId node) {
  auto axis = table.axis_of(node);
  if (!axis) throw Error(ErrorKind::kUnknownLabel, "node is not in the joint table");
  JointTable out;
  out.axes = table.axes;
  out.radix = table.radix;
  out.axes.erase(out.axes.begin() + static_cast<std::ptrdiff_t>(*axis));
  out.radix.erase(out.radix.begin() + static_cast<std::ptrdiff_t>(*axis));
  const std::size_t stride = table.stride(*axis);
  const std::size_t card = table.radix[*axis];
  const std::size_t total = static_cast<std::size_t>(table.values.size());
  out.values = Vector::Zero(static_cast<Eigen::Index>(total / card));
  for (std::size_t flat = 0; flat < total; ++flat) {
    const std::size_t high = flat / (stride * card);
    const std::size_t low = flat % stride;
    out.values(static_cast<Eigen::Index>(high * stride + low)) +=
        table.values(static_cast<Eigen::Index>(flat));
  }
  return out;
}

JointTable condition(const JointTable& table, const BeliefNetwork& net,
                     const Evidence& evidence) {
  JointTable out = table;
  for (const auto& [label, state] : evidence.items()) {
    const NodeId id = net.require(label);
    if (state >= net.variable(id).cardinality()) {
      throw Error(ErrorKind::kUnknownLabel, "state out of range for " + label);
    }
    auto axis = out.axis_of(id);
    if (!axis) throw Error(ErrorKind::kUnknownLabel, label + " is not in the joint table");
    const std::size_t stride = out.stride(*axis);
    const std::size_t card = out.radix[*axis];
    for (Eigen::Index flat = 0; flat < out.values.size(); ++flat) {
      if ((static_cast<std::size_t>(flat) / stride) % card != state) out.values(flat) = 0.0;
    }
  }
  const double mass = out.values.sum();
  if (!(mass > 0.0)) throw Error(ErrorKind::kZeroProbability, "evidence has zero probability");
  out.values /= mass;
  return out;
}

Vector marginal_over(const JointTable& table, const std::vector<NodeId>& nodes) {
  std::vector<std::size_t> axes;
  std::size_t size = 1;
  for (NodeId n : nodes) {
    auto axis = table.axis_of(n);
    if (!axis) throw Error(ErrorKind::kUnknownLabel, "node is not in the joint table");
    axes.push_back(*axis);
    size *= table.radix[*axis];
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(size));
  std::vector<std::size_t> digits(table.axes.size(), 0);
  for (Eigen::Index flat = 0; flat < table.values.size(); ++flat) {
    std::size_t idx = 0;
    for (std::size_t a : axes) idx = idx * table.radix[a] + digits[a];
    out(static_cast<Eigen::Index>(idx)) += table.values(flat);
    advance(digits, table.radix);
  }
  return out;
}

Vector space_marginal(const JointTable& table, const BeliefNetwork& net,
                      const StateSpace& space) {
  std::vector<NodeId> nodes;
  for (const auto& label : space.members()) nodes.push_back(net.require(label));
  return marginal_over(table, nodes);
}

std::pair<ConditionalMatrix, Distribution> arc_reverse_cpt(const ConditionalMatrix& p_ij,
                                                           const Distribution& p_j) {
  if (static_cast<std::size_t>(p_ij.cols()) != p_j.size()) {
    throw Error(ErrorKind::kDimension, "conditional and marginal sizes differ");
  }
  Matrix pair = p_ij.entries() * p_j.probs().asDiagonal();  // p(i, j)
  Vector p_i = pair.rowwise().sum();
  for (Eigen::Index a = 0; a < p_i.size(); ++a) {
    if (!(p_i(a) > 0.0)) {
      throw Error(ErrorKind::kZeroProbability,
                  "state " + std::to_string(a) + " has zero marginal; prune it first");
    }
  }
  Matrix rev = (p_i.cwiseInverse().asDiagonal() * pair).transpose();
  return {ConditionalMatrix(std::move(rev)), Distribution(std::move(p_i))};
}

Distribution posterior(const BeliefNetwork& net, const Evidence& evidence, NodeId query) {
  JointTable table = condition(joint(net), net, evidence);
  return Distribution(marginal_over(table, {query}));
}

ConditionalMatrix pairwise_conditional(const JointTable& table, const BeliefNetwork& net,
                                       const StateSpace& child_set,
                                       const StateSpace& parent_set) {
  const auto child_axes = axes_for(table, net, child_set.members());
  const auto parent_axes = axes_for(table, net, parent_set.members());
  Matrix pair = Matrix::Zero(static_cast<Eigen::Index>(child_set.cardinality()),
                             static_cast<Eigen::Index>(parent_set.cardinality()));
  std::vector<std::size_t> digits(table.axes.size(), 0);
  for (Eigen::Index flat = 0; flat < table.values.size(); ++flat) {
    const double v = table.values(flat);
    if (v != 0.0) {
      auto c = child_set.compact_index(space_state(digits, child_axes, child_set));
      auto p = parent_set.compact_index(space_state(digits, parent_axes, parent_set));
      if (c && p) pair(static_cast<Eigen::Index>(*c), static_cast<Eigen::Index>(*p)) += v;
    }
    advance(digits, table.radix);
  }
  for (Eigen::Index q = 0; q < pair.cols(); ++q) {
    const double mass = pair.col(q).sum();
    if (!(mass > 0.0)) {
      throw Error(ErrorKind::kZeroProbability,
                  "parent state " + std::to_string(parent_set.original_of(
                                        static_cast<std::size_t>(q))) +
                      " has zero probability; prune it first");
    }
    pair.col(q) /= mass;
  }
  return ConditionalMatrix(std::move(pair));
}

ConditionalMatrix pairwise_conditional(const BeliefNetwork& net, const StateSpace& child_set,
                                       const StateSpace& parent_set) {
  return pairwise_conditional(joint(net), net, child_set, parent_set);
}

}  // namespace sensnet
