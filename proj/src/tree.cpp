#include "sensnet/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "sensnet/error.hpp"

namespace sensnet {

namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

std::string edge_name(const TreeNetwork& tree, std::size_t e) {
  const auto& edge = tree.edge(e);
  return tree.node(edge.child).name + "<-" + tree.node(edge.parent).name;
}

TreeNetwork TreeNetwork::assemble(std::vector<Variable> variables,
                                  std::vector<CompoundNode> nodes, std::vector<TreeEdge> edges,
                                  double tol) {
  TreeNetwork t;
  t.variables_ = std::move(variables);
  t.nodes_ = std::move(nodes);
  t.edges_ = std::move(edges);
  const std::size_t n = t.nodes_.size();
  if (n == 0) throw Error(ErrorKind::kValidation, "tree has no nodes");
  for (std::size_t a = 0; a < t.variables_.size(); ++a) {
    if (!t.variable_index_.emplace(t.variables_[a].label, a).second) {
      throw Error(ErrorKind::kValidation, "duplicate variable " + t.variables_[a].label);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = t.nodes_[i];
    for (std::size_t k = 0; k < i; ++k) {
      if (t.nodes_[k].name == node.name) {
        throw Error(ErrorKind::kValidation, "duplicate node " + node.name);
      }
    }
    const auto& members = node.space.members();
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Variable& var = t.variable(members[m]);
      if (var.cardinality() != node.space.radix()[m]) {
        throw Error(ErrorKind::kDimension, "member " + members[m] + " of " + node.name +
                                               " has the wrong number of states");
      }
      if (std::count(members.begin(), members.end(), members[m]) != 1) {
        throw Error(ErrorKind::kValidation, node.name + " lists " + members[m] + " twice");
      }
    }
    if (node.prior.size() != node.space.cardinality()) {
      throw Error(ErrorKind::kDimension, "prior of " + node.name + " has " +
                                             std::to_string(node.prior.size()) +
                                             " entries, expected " +
                                             std::to_string(node.space.cardinality()));
    }
    for (std::size_t s = 0; s < node.prior.size(); ++s) {
      if (!(node.prior[s] > 0.0)) {
        throw Error(ErrorKind::kValidation,
                    "prior of " + node.name + " has a zero at state " +
                        std::to_string(node.space.original_of(s)) + "; prune it");
      }
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto& members = t.nodes_[i].space.members();
    for (std::size_t m = 0; m < members.size(); ++m) t.owners_[members[m]] = MemberRef{i, m};
  }
  for (const auto& var : t.variables_) t.owner(var.label);

  if (t.edges_.size() != n - 1) {
    throw Error(ErrorKind::kValidation, "a tree over " + std::to_string(n) + " nodes needs " +
                                            std::to_string(n - 1) + " edges, got " +
                                            std::to_string(t.edges_.size()));
  }
  t.adjacency_.assign(n, {});
  for (std::size_t e = 0; e < t.edges_.size(); ++e) {
    const auto& edge = t.edges_[e];
    if (edge.child >= n || edge.parent >= n || edge.child == edge.parent) {
      throw Error(ErrorKind::kValidation, "edge " + std::to_string(e) + " has bad endpoints");
    }
    t.adjacency_[edge.parent].push_back({edge.child, e});
    t.adjacency_[edge.child].push_back({edge.parent, e});
  }
  // Connected with n-1 edges implies a tree.
  std::vector<std::size_t> dist = t.hop_distances(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] == static_cast<std::size_t>(-1)) {
      throw Error(ErrorKind::kValidation, "tree is not connected: " + t.nodes_[i].name +
                                              " is unreachable");
    }
  }

  for (std::size_t e = 0; e < t.edges_.size(); ++e) {
    auto& edge = t.edges_[e];
    const std::string name = edge_name(t, e);
    const auto& pc = t.nodes_[edge.child].prior;
    const auto& pp = t.nodes_[edge.parent].prior;
    const auto nc = static_cast<Eigen::Index>(pc.size());
    const auto np = static_cast<Eigen::Index>(pp.size());
    if (edge.forward.q.cols() != nc || edge.forward.r.cols() != np ||
        edge.forward.q.rows() != edge.forward.r.rows()) {
      throw Error(ErrorKind::kDimension, "factors of edge " + name + " do not match " +
                                             std::to_string(nc) + "x" + std::to_string(np));
    }
    const Matrix s = edge.forward.dense();
    const double row_err = max_abs(s.rowwise().sum());
    const double col_err = max_abs(s.colwise().sum());
    if (row_err > tol || col_err > tol) {
      std::ostringstream os;
      os << "sensitivity of edge " << name << " does not have zero row and column sums ("
         << std::max(row_err, col_err) << ")";
      throw Error(ErrorKind::kValidation, os.str());
    }
    QRFactors derived = reverse(edge.forward, pc, pp);
    const bool has_backward = edge.backward.q.cols() != 0 || edge.backward.r.cols() != 0;
    if (has_backward) {
      if (edge.backward.q.cols() != np || edge.backward.r.cols() != nc ||
          edge.backward.rank() != edge.forward.rank()) {
        throw Error(ErrorKind::kDimension, "reverse factors of edge " + name +
                                               " have the wrong shape or rank");
      }
      const double err = max_abs(edge.backward.dense() - derived.dense());
      if (err > tol) {
        std::ostringstream os;
        os << "edge " << name << " is inconsistent: stored reverse sensitivity differs from "
           << "the reversal of the forward one by " << err;
        throw Error(ErrorKind::kValidation, os.str());
      }
    }
    edge.backward = std::move(derived);
  }
  return t;
}

std::optional<std::size_t> TreeNetwork::find_node(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t TreeNetwork::require_node(const std::string& name) const {
  auto i = find_node(name);
  if (!i) throw Error(ErrorKind::kUnknownLabel, "unknown tree node " + name);
  return *i;
}

const Variable& TreeNetwork::variable(const std::string& label) const {
  auto it = variable_index_.find(label);
  if (it == variable_index_.end()) throw Error(ErrorKind::kUnknownLabel, "unknown variable " + label);
  return variables_[it->second];
}

MemberRef TreeNetwork::owner(const std::string& label) const {
  auto it = owners_.find(label);
  if (it == owners_.end()) {
    throw Error(ErrorKind::kUnknownLabel, "variable " + label + " is in no tree node");
  }
  return it->second;
}

std::optional<std::size_t> TreeNetwork::edge_between(std::size_t a, std::size_t b) const {
  for (const auto& adj : adjacency_.at(a)) {
    if (adj.neighbor == b) return adj.edge;
  }
  return std::nullopt;
}

const Matrix& TreeNetwork::stored_r(std::size_t at, std::size_t e) const {
  const auto& edge = edges_.at(e);
  if (at == edge.parent) return edge.forward.r;
  if (at == edge.child) return edge.backward.r;
  throw Error(ErrorKind::kValidation, "node is not an endpoint of the edge");
}

Distribution TreeNetwork::variable_marginal(const std::string& label,
                                            const Distribution& owner_dist) const {
  const MemberRef ref = owner(label);
  return member_marginal(owner_dist, nodes_[ref.node].space, ref.position);
}

Distribution TreeNetwork::variable_prior(const std::string& label) const {
  return variable_marginal(label, nodes_[owner(label).node].prior);
}

std::vector<std::size_t> TreeNetwork::hop_distances(std::size_t from) const {
  std::vector<std::size_t> dist(nodes_.size(), static_cast<std::size_t>(-1));
  std::deque<std::size_t> frontier{from};
  dist.at(from) = 0;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    for (const auto& adj : adjacency_[u]) {
      if (dist[adj.neighbor] == static_cast<std::size_t>(-1)) {
        dist[adj.neighbor] = dist[u] + 1;
        frontier.push_back(adj.neighbor);
      }
    }
  }
  return dist;
}

std::vector<std::size_t> TreeNetwork::path(std::size_t a, std::size_t b) const {
  std::vector<std::size_t> prev(nodes_.size(), static_cast<std::size_t>(-1));
  std::deque<std::size_t> frontier{b};
  prev.at(b) = b;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    if (u == a) break;
    for (const auto& adj : adjacency_[u]) {
      if (prev[adj.neighbor] == static_cast<std::size_t>(-1)) {
        prev[adj.neighbor] = u;
        frontier.push_back(adj.neighbor);
      }
    }
  }
  std::vector<std::size_t> out{a};
  for (std::size_t u = a; u != b; u = prev[u]) out.push_back(prev[u]);
  return out;
}

bool TreeNetwork::all_binary() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const CompoundNode& n) { return n.space.cardinality() == 2; });
}

bool TreeNetwork::operator==(const TreeNetwork& other) const {
  if (nodes_.size() != other.nodes_.size() || edges_.size() != other.edges_.size() ||
      variables_.size() != other.variables_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < variables_.size(); ++k) {
    if (variables_[k].label != other.variables_[k].label ||
        variables_[k].states != other.variables_[k].states) {
      return false;
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = other.nodes_[i];
    if (a.name != b.name || !(a.space == b.space) ||
        !same_matrix(a.prior.probs(), b.prior.probs())) {
      return false;
    }
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& a = edges_[e];
    const auto& b = other.edges_[e];
    if (a.child != b.child || a.parent != b.parent || !same_matrix(a.forward.q, b.forward.q) ||
        !same_matrix(a.forward.r, b.forward.r) || !same_matrix(a.backward.q, b.backward.q) ||
        !same_matrix(a.backward.r, b.backward.r)) {
      return false;
    }
  }
  return true;
}

}  // namespace sensnet
