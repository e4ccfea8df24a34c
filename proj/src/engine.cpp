#include "sensnet/engine.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "sensnet/error.hpp"

namespace sensnet {

namespace {

// Lambda - P P^T applied on the right of an R factor.
Matrix times_covariance(const Matrix& r, const Vector& p) {
  Matrix out = r * p.asDiagonal();
  out -= (r * p) * p.transpose();
  return out;
}

}  // namespace

std::size_t EngineStats::max_edge_traversals() const {
  return edge_traversals.empty() ? 0
                                 : *std::max_element(edge_traversals.begin(), edge_traversals.end());
}

std::map<std::size_t, Assignment> group_evidence(const TreeNetwork& tree,
                                                 const Evidence& evidence) {
  std::map<std::size_t, Assignment> out;
  for (const auto& [label, state] : evidence.items()) {
    const Variable& var = tree.variable(label);
    if (state >= var.cardinality()) {
      throw Error(ErrorKind::kUnknownLabel, "state " + std::to_string(state) +
                                                " out of range for " + label);
    }
    out[tree.owner(label).node][label] = state;
  }
  return out;
}

QuerySession::QuerySession(const TreeNetwork& tree) : tree_(&tree) {
  for (const auto& node : tree.nodes()) {
    p_.push_back(node.prior.probs());
    p0_.push_back(node.prior.probs());
  }
  for (const auto& edge : tree.edges()) r_.push_back({edge.forward.r, edge.backward.r});
  touched_epoch_.assign(tree.size(), 0);
  reset_stats();
}

Distribution QuerySession::distribution(std::size_t node) const { return Distribution(p_.at(node)); }

Distribution QuerySession::committed_distribution(std::size_t node) const {
  return Distribution(p0_.at(node));
}

Distribution QuerySession::variable_distribution(const std::string& label) const {
  return tree_->variable_marginal(label, distribution(tree_->owner(label).node));
}

const Matrix& QuerySession::working_r(std::size_t at, std::size_t edge) const {
  const auto& e = tree_->edge(edge);
  if (at == e.parent) return r_[edge][0];
  if (at == e.child) return r_[edge][1];
  throw Error(ErrorKind::kValidation, "node is not an endpoint of the edge");
}

Matrix& QuerySession::r_at(std::size_t at, std::size_t edge) {
  return const_cast<Matrix&>(working_r(at, edge));
}

void QuerySession::reset_stats() {
  stats_ = EngineStats{};
  stats_.edge_traversals.assign(tree_->edges().size(), 0);
  ++epoch_;
}

void QuerySession::touch(std::size_t node) {
  if (touched_epoch_[node] != epoch_) {
    touched_epoch_[node] = epoch_;
    ++stats_.nodes_touched;
  }
}

void QuerySession::save_p(std::size_t node) {
  if (logging_) p_log_.emplace_back(node, p_[node]);
}

void QuerySession::save_r(std::size_t at, std::size_t edge) {
  if (logging_) r_log_.emplace_back(at, edge, r_at(at, edge));
}

Vector QuerySession::settle(Vector p, std::size_t node) const {
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (p(k) < -kNormTolerance) {
      std::ostringstream os;
      os << "update drove state " << k << " of " << tree_->node(node).name << " to " << p(k)
         << "; the tree is inconsistent";
      throw Error(ErrorKind::kRange, os.str());
    }
    if (p(k) < kZeroClamp) p(k) = 0.0;
  }
  const double mass = p.sum();
  if (!(mass > 0.0)) {
    throw Error(ErrorKind::kZeroProbability, "distribution of " + tree_->node(node).name +
                                                 " lost all mass");
  }
  return p / mass;
}

void QuerySession::receive(std::size_t node, std::size_t edge, const Vector& y) {
  Matrix& r = r_at(node, edge);
  ++stats_.messages;
  ++stats_.edge_traversals[edge];
  touch(node);
  if (static_cast<std::size_t>(y.size()) != tree_->edge(edge).rank()) {
    ++stats_.length_mismatches;
    throw Error(ErrorKind::kDimension, "message length does not match the edge rank");
  }
  if (barren_ != nullptr && (*barren_)[node]) ++stats_.barren_deliveries;
  Matrix q = times_covariance(r, p_[node]);
  save_p(node);
  save_r(node, edge);
  p_[node] = settle(p0_[node] + q.transpose() * y, node);
  r = reverse_r(q, p_[node], true);
}

void QuerySession::send_simq(std::size_t from, std::size_t edge) {
  const std::size_t to = tree_->edge(edge).other(from);
  simq_step(to, from, r_at(from, edge) * (p_[from] - p0_[from]));
}

void QuerySession::simq_step(std::size_t receiver, std::size_t sender, const Vector& y) {
  auto edge = tree_->edge_between(receiver, sender);
  if (!edge) throw Error(ErrorKind::kValidation, "simq message between non-adjacent nodes");
  receive(receiver, *edge, y);
  for (const auto& adj : tree_->adjacency(receiver)) {
    if (adj.edge != *edge) send_simq(receiver, adj.edge);
  }
}

void QuerySession::instantiate(std::size_t node, const Assignment& values) {
  if (pending_) {
    throw Error(ErrorKind::kValidation, "commit the previous instantiation first");
  }
  const auto& space = tree_->node(node).space;
  p_.at(node) = restrict_distribution(Distribution(p_[node]), space, values).probs();
  pending_ = true;
  touch(node);
  for (const auto& adj : tree_->adjacency(node)) send_simq(node, adj.edge);
}

void QuerySession::instantiate(const std::string& label, std::size_t state) {
  Evidence ev;
  ev.set(label, state);
  const auto groups = group_evidence(*tree_, ev);
  instantiate(groups.begin()->first, groups.begin()->second);
}

void QuerySession::commit() {
  p0_ = p_;
  pending_ = false;
}

void QuerySession::multi_evidence_simq(const Evidence& evidence,
                                       const std::vector<std::string>& order) {
  std::vector<std::string> labels = order;
  if (labels.empty()) {
    for (const auto& item : evidence.items()) labels.push_back(item.first);
  } else if (labels.size() != evidence.size()) {
    throw Error(ErrorKind::kValidation, "instantiation order must list every evidence label once");
  }
  for (const auto& label : labels) {
    const std::size_t* state = evidence.find(label);
    if (state == nullptr) {
      throw Error(ErrorKind::kValidation, "instantiation order names " + label +
                                              " which has no evidence");
    }
    instantiate(label, *state);
    commit();
  }
}

std::vector<bool> QuerySession::mark_barren(std::size_t query,
                                            const std::map<std::size_t, Assignment>& evidence,
                                            std::size_t radius) const {
  std::vector<bool> barren(tree_->size(), true);
  barren.at(query) = false;
  if (evidence.empty()) return barren;
  std::unordered_map<std::size_t, std::pair<std::size_t, std::size_t>> seen;  // node -> (parent, depth)
  seen[query] = {query, 0};
  std::deque<std::size_t> frontier{query};
  std::size_t remaining = evidence.size() - (evidence.count(query) ? 1 : 0);
  while (!frontier.empty() && remaining > 0) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    const std::size_t depth = seen[u].second;
    if (depth >= radius) continue;
    for (const auto& adj : tree_->adjacency(u)) {
      if (seen.count(adj.neighbor)) continue;
      seen[adj.neighbor] = {u, depth + 1};
      frontier.push_back(adj.neighbor);
      if (evidence.count(adj.neighbor)) --remaining;
    }
  }
  for (const auto& [node, values] : evidence) {
    auto it = seen.find(node);
    if (it == seen.end()) continue;
    for (std::size_t v = node; barren[v]; v = seen[v].first) barren[v] = false;
  }
  return barren;
}

Vector QuerySession::misq(std::size_t node, std::size_t above_edge, const Vector& y) {
  ++stats_.messages;
  ++stats_.edge_traversals[above_edge];
  touch(node);
  if (static_cast<std::size_t>(y.size()) != tree_->edge(above_edge).rank()) {
    ++stats_.length_mismatches;
    throw Error(ErrorKind::kDimension, "message length does not match the edge rank");
  }
  if ((*barren_)[node]) ++stats_.barren_deliveries;

  std::vector<std::size_t> below;
  for (const auto& adj : tree_->adjacency(node)) {
    if (adj.edge != above_edge && !(*barren_)[adj.neighbor]) below.push_back(adj.edge);
  }
  const auto inst = instantiated_->find(node);
  const bool is_evidence = inst != instantiated_->end();

  Vector back;
  if (is_evidence || below.size() != 1) {
    Matrix& r_above = r_at(node, above_edge);
    const Matrix q = times_covariance(r_above, p_[node]);
    save_p(node);
    save_r(node, above_edge);
    p_[node] = settle(p0_[node] + q.transpose() * y, node);
    r_above = reverse_r(q, p_[node], true);
    const Vector p1 = p_[node];
    for (std::size_t e : below) {
      const Matrix& r_below = r_at(node, e);
      const Vector reply =
          misq(tree_->edge(e).other(node), e, r_below * (p_[node] - p0_[node]));
      const Matrix qb = times_covariance(r_below, p_[node]);
      p_[node] = settle(p_[node] + qb.transpose() * reply, node);
    }
    if (is_evidence) {
      p_[node] = restrict_distribution(Distribution(p_[node]), tree_->node(node).space,
                                       inst->second)
                     .probs();
    }
    back = r_above * (p_[node] - p1);
  } else {
    const std::size_t e = below.front();
    const Matrix q = times_covariance(r_at(node, above_edge), p_[node]);
    const Matrix z = r_at(node, e) * q.transpose();
    const Vector reply = misq(tree_->edge(e).other(node), e, z * y);
    back = z.transpose() * reply;
  }
  ++stats_.messages;
  ++stats_.edge_traversals[above_edge];
  if (static_cast<std::size_t>(back.size()) != tree_->edge(above_edge).rank()) {
    ++stats_.length_mismatches;
  }
  return back;
}

void QuerySession::rollback() {
  logging_ = false;
  for (auto it = r_log_.rbegin(); it != r_log_.rend(); ++it) {
    r_at(std::get<0>(*it), std::get<1>(*it)) = std::move(std::get<2>(*it));
  }
  for (auto it = p_log_.rbegin(); it != p_log_.rend(); ++it) p_[it->first] = std::move(it->second);
  p_log_.clear();
  r_log_.clear();
  instantiated_ = nullptr;
  barren_ = nullptr;
}

Distribution QuerySession::query(std::size_t query_node, const Evidence& evidence,
                                 std::size_t radius) {
  if (pending_) throw Error(ErrorKind::kValidation, "commit the instantiation before querying");
  if (query_node >= tree_->size()) throw Error(ErrorKind::kUnknownLabel, "unknown query node");
  const auto groups = group_evidence(*tree_, evidence);
  std::map<std::size_t, Assignment> in_range;
  for (const auto& [node, values] : groups) in_range.insert({node, values});
  const std::vector<bool> barren = mark_barren(query_node, in_range, radius);
  // Evidence outside the considered radius is dropped.
  for (auto it = in_range.begin(); it != in_range.end();) {
    it = barren[it->first] ? in_range.erase(it) : std::next(it);
  }

  instantiated_ = &in_range;
  barren_ = &barren;
  logging_ = true;
  p_log_.clear();
  r_log_.clear();
  touch(query_node);
  Vector result;
  try {
    save_p(query_node);
    for (const auto& adj : tree_->adjacency(query_node)) {
      if (barren[adj.neighbor]) continue;
      const Matrix& r = r_at(query_node, adj.edge);
      const Vector reply = misq(adj.neighbor, adj.edge, r * (p_[query_node] - p0_[query_node]));
      const Matrix q = times_covariance(r, p_[query_node]);
      p_[query_node] = settle(p_[query_node] + q.transpose() * reply, query_node);
    }
    if (auto it = in_range.find(query_node); it != in_range.end()) {
      p_[query_node] = restrict_distribution(Distribution(p_[query_node]),
                                             tree_->node(query_node).space, it->second)
                           .probs();
    }
    result = p_[query_node];
  } catch (...) {
    rollback();
    throw;
  }
  rollback();
  return Distribution(std::move(result));
}

Distribution QuerySession::query(const std::string& label, const Evidence& evidence,
                                 std::size_t radius) {
  const MemberRef ref = tree_->owner(label);
  const Distribution d = query(ref.node, evidence, radius);
  return member_marginal(d, tree_->node(ref.node).space, ref.position);
}

Matrix QuerySession::current_sensitivity(std::size_t i, std::size_t j) const {
  auto edge = tree_->edge_between(i, j);
  if (!edge) throw Error(ErrorKind::kValidation, "nodes are not adjacent");
  const Matrix q = times_covariance(working_r(i, *edge), p_[i]);
  return q.transpose() * working_r(j, *edge);
}

Matrix QuerySession::path_sensitivity(std::size_t i, std::size_t j) const {
  const std::vector<std::size_t> nodes = tree_->path(i, j);
  const auto n = static_cast<Eigen::Index>(p_.at(i).size());
  Matrix s = Matrix::Identity(n, n);
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    s = s * current_sensitivity(nodes[k], nodes[k + 1]);
  }
  return s;
}

}  // namespace sensnet
