#include "sensnet/truncation.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "sensnet/error.hpp"

namespace sensnet {

void DecayProfile::check_ranges() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::kApproxPrecondition, "alpha must lie in (0, 1)");
  }
  if (!(eta > 0.0 && eta <= 0.25)) {
    throw Error(ErrorKind::kApproxPrecondition, "eta must lie in (0, .25]");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::kApproxPrecondition, "epsilon must lie in (0, 1)");
  }
}

ProfileCheck verify_profile(const TreeNetwork& tree, const DecayProfile& profile) {
  profile.check_ranges();
  for (const auto& node : tree.nodes()) {
    if (node.space.cardinality() != 2) {
      throw Error(ErrorKind::kApproxPrecondition,
                  node.name + " has " + std::to_string(node.space.cardinality()) +
                      " states; the approximation needs a binary tree");
    }
  }
  ProfileCheck check;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& p = tree.node(i).prior;
    if (!(p[0] * p[1] > profile.eta)) {
      std::ostringstream os;
      os << "node " << tree.node(i).name << " has p(not i)p(i) = " << p[0] * p[1]
         << " <= eta = " << profile.eta;
      check.ok = false;
      check.witness = os.str();
      check.node = i;
      return check;
    }
  }
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    const auto& edge = tree.edge(e);
    const double forward = std::abs(binary_value(edge.forward.dense()).value);
    const double backward = std::abs(binary_value(edge.backward.dense()).value);
    if (!(forward < profile.alpha && backward < profile.alpha)) {
      std::ostringstream os;
      os << "edge " << edge_name(tree, e) << " has |S| = " << std::max(forward, backward)
         << " >= alpha = " << profile.alpha;
      check.ok = false;
      check.witness = os.str();
      check.edge = e;
      return check;
    }
  }
  return check;
}

VerifiedProfile VerifiedProfile::verify(const TreeNetwork& tree, const DecayProfile& profile) {
  const ProfileCheck check = verify_profile(tree, profile);
  if (!check.ok) throw Error(ErrorKind::kApproxPrecondition, check.witness);
  return VerifiedProfile(tree, profile);
}

std::size_t truncation_radius(const DecayProfile& profile, std::size_t n_evidence) {
  profile.check_ranges();
  if (n_evidence == 0) return 0;
  const double target =
      profile.eta * profile.epsilon / (2.0 * static_cast<double>(n_evidence));
  const double hops = std::log(target) / std::log(profile.alpha);
  return static_cast<std::size_t>(std::ceil(hops));
}

TruncationPlan plan_truncation(const VerifiedProfile& profile, std::size_t query_node,
                               const Evidence& evidence) {
  const TreeNetwork& tree = profile.tree();
  TruncationPlan plan;
  plan.radius = truncation_radius(profile.profile(), evidence.size());
  plan.guaranteed_bound = std::expm1(profile.profile().epsilon);
  // Hop distances within the radius only, so the cost does not grow with the tree.
  std::unordered_map<std::size_t, std::size_t> depth{{query_node, 0}};
  std::deque<std::size_t> frontier{query_node};
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    if (depth[u] >= plan.radius) continue;
    for (const auto& adj : tree.adjacency(u)) {
      if (depth.emplace(adj.neighbor, depth[u] + 1).second) frontier.push_back(adj.neighbor);
    }
  }
  for (const auto& [label, state] : evidence.items()) {
    if (depth.count(tree.owner(label).node)) plan.retained_evidence.push_back(label);
  }
  return plan;
}

ApproxResult truncated_query(QuerySession& session, const std::string& query,
                             const Evidence& evidence, const VerifiedProfile& profile) {
  if (&session.tree() != &profile.tree()) {
    throw Error(ErrorKind::kApproxPrecondition, "profile was verified on a different tree");
  }
  const MemberRef ref = session.tree().owner(query);
  ApproxResult out;
  out.plan = plan_truncation(profile, ref.node, evidence);
  out.bound = out.plan.guaranteed_bound;
  Evidence retained;
  for (const auto& label : out.plan.retained_evidence) retained.set(label, *evidence.find(label));
  out.posterior = session.query(query, retained, out.plan.radius);
  return out;
}

}  // namespace sensnet
