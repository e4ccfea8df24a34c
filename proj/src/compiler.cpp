#include "sensnet/compiler.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "sensnet/error.hpp"
#include "sensnet/oracle.hpp"

namespace sensnet {

namespace {

Matrix center_rows(Matrix m) {
  if (m.rows() > 0 && m.cols() > 0) m.colwise() -= m.rowwise().mean();
  return m;
}

bool is_subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Orients an undirected tree from cluster 0 outwards.
std::vector<std::pair<std::size_t, std::size_t>> orient(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& undirected) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : undirected) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::vector<bool> seen(n, false);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    // Later components hang off cluster 0 through an empty separator.
    if (root != 0) out.emplace_back(root, 0);
    std::deque<std::size_t> frontier{root};
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          out.emplace_back(v, u);
          frontier.push_back(v);
        }
      }
    }
  }
  return out;
}

}  // namespace

void UndirectedGraph::add_edge(std::size_t a, std::size_t b) {
  if (a == b) return;
  adjacency.at(a).insert(b);
  adjacency.at(b).insert(a);
}

std::size_t UndirectedGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& s : adjacency) twice += s.size();
  return twice / 2;
}

UndirectedGraph moralize(const BeliefNetwork& net) {
  UndirectedGraph g;
  g.adjacency.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& pa = net.parents(NodeId(i));
    for (std::size_t a = 0; a < pa.size(); ++a) {
      g.add_edge(i, pa[a].index());
      for (std::size_t b = a + 1; b < pa.size(); ++b) g.add_edge(pa[a].index(), pa[b].index());
    }
  }
  return g;
}

ClusterPlan plan_clusters(const UndirectedGraph& moral, const BeliefNetwork& net) {
  const std::size_t n = net.size();
  ClusterPlan plan;
  if (n == 0) return plan;

  bool tree_shaped = true;
  for (std::size_t i = 0; i < n; ++i) tree_shaped &= net.parents(NodeId(i)).size() <= 1;
  if (tree_shaped) {
    for (std::size_t i = 0; i < n; ++i) {
      plan.clusters.push_back({net.variable(NodeId(i)).label});
      plan.names.push_back("X_" + std::to_string(i + 1));
    }
    std::vector<std::pair<std::size_t, std::size_t>> undirected;
    for (std::size_t i = 0; i < n; ++i) {
      for (NodeId p : net.parents(NodeId(i))) undirected.emplace_back(i, p.index());
    }
    plan.tree_edges = orient(n, undirected);
    return plan;
  }

  // Greedy min-fill elimination; ties go to the smaller neighbourhood, then
  // the lower index.
  UndirectedGraph g = moral;
  std::vector<bool> eliminated(n, false);
  std::vector<std::vector<std::size_t>> cliques;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    std::size_t best_degree = std::numeric_limits<std::size_t>::max();
    for (std::size_t v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      std::vector<std::size_t> nb(g.adjacency[v].begin(), g.adjacency[v].end());
      std::size_t fill = 0;
      for (std::size_t a = 0; a < nb.size(); ++a) {
        for (std::size_t b = a + 1; b < nb.size(); ++b) fill += g.has_edge(nb[a], nb[b]) ? 0 : 1;
      }
      if (fill < best_fill || (fill == best_fill && nb.size() < best_degree)) {
        best = v;
        best_fill = fill;
        best_degree = nb.size();
      }
    }
    std::vector<std::size_t> nb(g.adjacency[best].begin(), g.adjacency[best].end());
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) g.add_edge(nb[a], nb[b]);
    }
    std::vector<std::size_t> clique = nb;
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    cliques.push_back(std::move(clique));
    for (std::size_t u : nb) g.adjacency[u].erase(best);
    g.adjacency[best].clear();
    eliminated[best] = true;
  }
  std::vector<std::vector<std::size_t>> maximal;
  for (std::size_t c = 0; c < cliques.size(); ++c) {
    bool dominated = false;
    for (std::size_t d = 0; d < cliques.size() && !dominated; ++d) {
      if (c == d) continue;
      const bool sub = is_subset(cliques[c], cliques[d]);
      // Equal cliques: keep the first occurrence only.
      dominated = sub && (cliques[c].size() < cliques[d].size() || d < c);
    }
    if (!dominated) maximal.push_back(cliques[c]);
  }
  // Present clusters in order of their lowest member.
  std::sort(maximal.begin(), maximal.end());

  // Kruskal on separator size, heaviest first; zero-weight pairs join components.
  struct Candidate {
    std::size_t weight, a, b;
  };
  std::vector<Candidate> candidates;
  for (std::size_t a = 0; a < maximal.size(); ++a) {
    for (std::size_t b = a + 1; b < maximal.size(); ++b) {
      std::vector<std::size_t> sep;
      std::set_intersection(maximal[a].begin(), maximal[a].end(), maximal[b].begin(),
                            maximal[b].end(), std::back_inserter(sep));
      candidates.push_back({sep.size(), a, b});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });
  std::vector<std::size_t> root(maximal.size());
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](std::size_t v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  std::vector<std::pair<std::size_t, std::size_t>> undirected;
  for (const auto& c : candidates) {
    const std::size_t ra = find(c.a), rb = find(c.b);
    if (ra == rb) continue;
    root[ra] = rb;
    undirected.emplace_back(c.a, c.b);
  }
  for (std::size_t c = 0; c < maximal.size(); ++c) {
    std::vector<std::string> labels;
    for (std::size_t v : maximal[c]) labels.push_back(net.variable(NodeId(v)).label);
    plan.clusters.push_back(std::move(labels));
    plan.names.push_back("X_" + std::to_string(c + 1));
  }
  plan.tree_edges = orient(maximal.size(), undirected);
  return plan;
}

bool d_separated(const BeliefNetwork& net, const std::set<std::size_t>& x,
                 const std::set<std::size_t>& y, const std::set<std::size_t>& z) {
  const std::size_t n = net.size();
  // Ancestral set of X, Y and Z.
  std::vector<bool> keep(n, false);
  std::deque<std::size_t> frontier;
  for (const auto* s : {&x, &y, &z}) {
    for (std::size_t v : *s) {
      if (!keep[v]) {
        keep[v] = true;
        frontier.push_back(v);
      }
    }
  }
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop_front();
    for (NodeId p : net.parents(NodeId(v))) {
      if (!keep[p.index()]) {
        keep[p.index()] = true;
        frontier.push_back(p.index());
      }
    }
  }
  UndirectedGraph g;
  g.adjacency.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!keep[v]) continue;
    const auto& pa = net.parents(NodeId(v));
    for (std::size_t a = 0; a < pa.size(); ++a) {
      g.add_edge(v, pa[a].index());
      for (std::size_t b = a + 1; b < pa.size(); ++b) g.add_edge(pa[a].index(), pa[b].index());
    }
  }
  std::vector<bool> seen(n, false);
  for (std::size_t v : x) {
    if (z.count(v) == 0) {
      seen[v] = true;
      frontier.push_back(v);
    }
  }
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop_front();
    if (y.count(v) != 0) return false;
    for (std::size_t u : g.adjacency[v]) {
      if (!seen[u] && z.count(u) == 0) {
        seen[u] = true;
        frontier.push_back(u);
      }
    }
  }
  return true;
}

bool covers_families(const ClusterPlan& plan, const BeliefNetwork& net) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    std::vector<std::string> family{net.variable(NodeId(i)).label};
    for (NodeId p : net.parents(NodeId(i))) family.push_back(net.variable(p).label);
    bool found = false;
    for (const auto& cluster : plan.clusters) {
      found = std::all_of(family.begin(), family.end(), [&](const std::string& l) {
        return std::find(cluster.begin(), cluster.end(), l) != cluster.end();
      });
      if (found) break;
    }
    if (!found) return false;
  }
  return true;
}

std::vector<std::string> check_plan(const ClusterPlan& plan, const BeliefNetwork& net) {
  std::vector<std::string> violations;
  const std::size_t k = plan.clusters.size();
  if (k == 0) {
    violations.push_back("plan has no clusters");
    return violations;
  }
  if (!plan.names.empty() && plan.names.size() != k) {
    violations.push_back("plan names and clusters differ in number");
  }
  std::vector<std::set<std::size_t>> vars(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (plan.clusters[c].empty()) violations.push_back("cluster " + std::to_string(c) + " is empty");
    for (const auto& label : plan.clusters[c]) {
      auto id = net.find(label);
      if (!id) {
        violations.push_back("cluster " + std::to_string(c) + " names unknown node " + label);
        continue;
      }
      if (!vars[c].insert(id->index()).second) {
        violations.push_back("cluster " + std::to_string(c) + " lists " + label + " twice");
      }
    }
  }
  for (std::size_t v = 0; v < net.size(); ++v) {
    bool covered = false;
    for (const auto& s : vars) covered |= s.count(v) != 0;
    if (!covered) violations.push_back("node " + net.variable(NodeId(v)).label + " is in no cluster");
  }
  if (plan.tree_edges.size() + 1 != k) {
    violations.push_back("plan needs " + std::to_string(k - 1) + " tree edges, has " +
                         std::to_string(plan.tree_edges.size()));
    return violations;
  }
  std::vector<std::vector<std::size_t>> adj(k);
  for (auto [a, b] : plan.tree_edges) {
    if (a >= k || b >= k || a == b) {
      violations.push_back("tree edge with bad endpoints");
      return violations;
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(k, false);
  std::deque<std::size_t> frontier{0};
  seen[0] = true;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        frontier.push_back(v);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    violations.push_back("tree edges do not connect every cluster");
    return violations;
  }
  if (!violations.empty()) return violations;

  // Running intersection: the clusters holding a variable form a connected subtree.
  for (std::size_t v = 0; v < net.size(); ++v) {
    std::vector<std::size_t> holders;
    for (std::size_t c = 0; c < k; ++c) {
      if (vars[c].count(v)) holders.push_back(c);
    }
    if (holders.size() <= 1) continue;
    std::vector<bool> reached(k, false);
    std::deque<std::size_t> q{holders[0]};
    reached[holders[0]] = true;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      for (std::size_t w : adj[u]) {
        if (!reached[w] && vars[w].count(v)) {
          reached[w] = true;
          q.push_back(w);
        }
      }
    }
    for (std::size_t c : holders) {
      if (!reached[c]) {
        violations.push_back("running intersection fails for " + net.variable(NodeId(v)).label);
        break;
      }
    }
  }
  if (!violations.empty()) return violations;

  for (std::size_t c = 0; c < k; ++c) {
    // Components of the tree with cluster c removed, one per neighbour.
    std::vector<std::set<std::size_t>> parts;
    for (std::size_t start : adj[c]) {
      std::set<std::size_t> part;
      std::vector<bool> mark(k, false);
      mark[c] = true;
      mark[start] = true;
      std::deque<std::size_t> q{start};
      while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop_front();
        for (std::size_t v : vars[u]) {
          if (!vars[c].count(v)) part.insert(v);
        }
        for (std::size_t w : adj[u]) {
          if (!mark[w]) {
            mark[w] = true;
            q.push_back(w);
          }
        }
      }
      parts.push_back(std::move(part));
    }
    for (std::size_t p = 0; p < parts.size(); ++p) {
      std::set<std::size_t> rest;
      for (std::size_t o = 0; o < parts.size(); ++o) {
        if (o != p) rest.insert(parts[o].begin(), parts[o].end());
      }
      if (parts[p].empty() || rest.empty()) continue;
      if (!d_separated(net, parts[p], rest, vars[c])) {
        std::string name = plan.names.empty() ? std::to_string(c) : plan.names[c];
        violations.push_back("cluster " + name + " does not separate its neighbours' sides");
      }
    }
  }
  return violations;
}

double EdgeReport::compression() const {
  if (rank == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(dense_size()) / static_cast<double>(qr_size());
}

std::size_t CompileReport::pruned_state_count() const {
  std::size_t total = 0;
  for (const auto& n : nodes) total += n.pruned.size();
  return total;
}

CompileReport report_for(const TreeNetwork& tree) {
  CompileReport report;
  for (const auto& node : tree.nodes()) report.nodes.push_back({node.name, node.space.pruned_states()});
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    const auto& edge = tree.edge(e);
    report.edges.push_back({edge_name(tree, e), tree.node(edge.child).space.cardinality(),
                            tree.node(edge.parent).space.cardinality(), edge.rank()});
  }
  return report;
}

std::pair<TreeNetwork, CompileReport> compile(const BeliefNetwork& net, const ClusterPlan& plan,
                                              const CompileOptions& options) {
  if (auto violations = validate_network(net); !violations.empty()) {
    throw Error(ErrorKind::kValidation, "invalid network: " + violations.front());
  }
  if (auto violations = check_plan(plan, net); !violations.empty()) {
    throw Error(ErrorKind::kValidation, "inconsistent plan: " + violations.front());
  }
  const JointTable table = joint(net);
  std::vector<CompoundNode> nodes;
  for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
    std::vector<std::size_t> radix;
    for (const auto& label : plan.clusters[c]) {
      radix.push_back(net.variable(net.require(label)).cardinality());
    }
    StateSpace space(plan.clusters[c], radix);
    const Vector full = space_marginal(table, net, space);
    std::vector<std::size_t> drop;
    for (Eigen::Index s = 0; s < full.size(); ++s) {
      if (full(s) <= options.prune_threshold) drop.push_back(static_cast<std::size_t>(s));
    }
    space.prune(drop);
    Vector kept(static_cast<Eigen::Index>(space.cardinality()));
    for (std::size_t s = 0; s < space.cardinality(); ++s) {
      kept(static_cast<Eigen::Index>(s)) = full(static_cast<Eigen::Index>(space.original_of(s)));
    }
    const std::string name = plan.names.empty() ? "X_" + std::to_string(c + 1) : plan.names[c];
    nodes.push_back({name, std::move(space), Distribution(kept / kept.sum())});
  }
  std::vector<TreeEdge> edges;
  for (auto [child, parent] : plan.tree_edges) {
    const ConditionalMatrix p =
        pairwise_conditional(table, net, nodes[child].space, nodes[parent].space);
    TreeEdge edge;
    edge.child = child;
    edge.parent = parent;
    edge.forward = qr_factor(cpt_to_sensitivity(p), options.rank_tolerance);
    edges.push_back(std::move(edge));
  }
  TreeNetwork tree = TreeNetwork::assemble(net.variables(), std::move(nodes), std::move(edges));
  CompileReport report = report_for(tree);
  return {std::move(tree), std::move(report)};
}

TreeNetwork compile_tree_shaped(const BeliefNetwork& net, const CompileOptions& options) {
  if (auto violations = validate_network(net); !violations.empty()) {
    throw Error(ErrorKind::kValidation, "invalid network: " + violations.front());
  }
  const ClusterPlan plan = plan_clusters(moralize(net), net);
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.parents(NodeId(i)).size() > 1) {
      throw Error(ErrorKind::kValidation, "network is not tree shaped");
    }
  }
  std::vector<Vector> marginal(net.size());
  for (NodeId id : net.topological_order()) {
    const auto& pa = net.parents(id);
    marginal[id.index()] = pa.empty() ? Vector(net.cpt(id).col(0))
                                      : Vector(net.cpt(id) * marginal[pa.front().index()]);
  }
  std::vector<CompoundNode> nodes;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& var = net.variable(NodeId(i));
    if (marginal[i].minCoeff() <= options.prune_threshold) {
      throw Error(ErrorKind::kValidation, var.label + " has a zero-probability state");
    }
    nodes.push_back({plan.names[i], StateSpace({var.label}, {var.cardinality()}),
                     Distribution(marginal[i])});
  }
  std::vector<TreeEdge> edges;
  for (auto [child, parent] : plan.tree_edges) {
    TreeEdge edge;
    edge.child = child;
    edge.parent = parent;
    Matrix cpt = net.cpt(NodeId(child));
    const auto& pc = net.parents(NodeId(child));
    const auto& pp = net.parents(NodeId(parent));
    if (!pc.empty() && pc.front().index() == parent) {
      // DAG edge parent -> child: the table itself.
    } else if (!pp.empty() && pp.front().index() == child) {
      // The DAG edge points the other way: use the Bayes-reversed table.
      cpt = arc_reverse_cpt(ConditionalMatrix(net.cpt(NodeId(parent))),
                            Distribution(marginal[child]))
                .first.entries();
    } else {
      // Separate components joined by an empty separator.
      cpt = marginal[child].replicate(1, static_cast<Eigen::Index>(marginal[parent].size()));
    }
    edge.forward = qr_factor(cpt_to_sensitivity(ConditionalMatrix(cpt)), options.rank_tolerance);
    edges.push_back(std::move(edge));
  }
  return TreeNetwork::assemble(net.variables(), std::move(nodes), std::move(edges));
}

TreeNetwork accept_precompiled(std::vector<Variable> variables, std::vector<CompoundNode> nodes,
                               std::vector<TreeEdge> edges, double tol) {
  for (auto& edge : edges) {
    if (edge.forward.q.rows() != edge.forward.r.rows()) {
      throw Error(ErrorKind::kDimension, "factor ranks differ on an edge");
    }
    edge.forward.q = center_rows(std::move(edge.forward.q));
    edge.forward.r = center_rows(std::move(edge.forward.r));
    if (edge.backward.q.size() != 0) {
      edge.backward.q = center_rows(std::move(edge.backward.q));
      edge.backward.r = center_rows(std::move(edge.backward.r));
    }
  }
  return TreeNetwork::assemble(std::move(variables), std::move(nodes), std::move(edges), tol);
}

}  // namespace sensnet
