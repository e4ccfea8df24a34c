#include "sensnet/validation.hpp"

#include <cmath>
#include <sstream>

#include "sensnet/engine.hpp"
#include "sensnet/error.hpp"
#include "sensnet/oracle.hpp"
#include "sensnet/random_networks.hpp"

namespace sensnet {

namespace {

std::string describe(const Evidence& ev) {
  if (ev.empty()) return "{}";
  std::string out = "{";
  for (const auto& [label, state] : ev.items()) {
    out += (out.size() > 1 ? "," : "") + label + "=" + std::to_string(state);
  }
  return out + "}";
}

double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return INFINITY;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

ValidationReport validate_against_oracle(const BeliefNetwork& net, const TreeNetwork& tree,
                                         const ValidationOptions& options) {
  ValidationReport report;
  const JointTable table = joint(net);

  for (const auto& var : net.variables()) tree.owner(var.label);
  for (const auto& node : tree.nodes()) {
    const Vector full = space_marginal(table, net, node.space);
    for (std::size_t s : node.space.pruned_states()) {
      if (full(static_cast<Eigen::Index>(s)) > 1e-12) {
        report.failures.push_back(node.name + " prunes state " + std::to_string(s) +
                                  " with prior " + std::to_string(full(static_cast<Eigen::Index>(s))));
      }
    }
    Vector kept(static_cast<Eigen::Index>(node.space.cardinality()));
    for (std::size_t s = 0; s < node.space.cardinality(); ++s) {
      kept(static_cast<Eigen::Index>(s)) = full(static_cast<Eigen::Index>(node.space.original_of(s)));
    }
    const double err = max_abs_diff(kept, node.prior.probs());
    report.max_prior_error = std::max(report.max_prior_error, err);
    if (err > options.tolerance) {
      std::ostringstream os;
      os << "prior of " << node.name << " differs from enumeration by " << err;
      report.failures.push_back(os.str());
    }
  }
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    const auto& edge = tree.edge(e);
    const ConditionalMatrix p = pairwise_conditional(table, net, tree.node(edge.child).space,
                                                     tree.node(edge.parent).space);
    const Matrix diff = cpt_to_sensitivity(p) - edge.forward.dense();
    const double err = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
    if (err > report.max_edge_error) {
      report.max_edge_error = err;
      report.worst_edge = edge_name(tree, e);
    }
    if (err > options.tolerance) {
      std::ostringstream os;
      os << "edge " << edge_name(tree, e) << " sensitivity differs from enumeration by " << err;
      report.failures.push_back(os.str());
    }
  }

  std::vector<Evidence> cases;
  if (options.samples) {
    Rng rng(options.seed);
    std::size_t attempts = 0;
    while (cases.size() < *options.samples && attempts < 100 * *options.samples + 100) {
      ++attempts;
      Evidence ev = random_evidence(rng, net, options.max_evidence);
      try {
        condition(table, net, ev);
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::kZeroProbability) continue;
        throw;
      }
      cases.push_back(std::move(ev));
    }
  } else {
    double total = 1.0;
    for (const auto& var : net.variables()) total *= static_cast<double>(var.cardinality() + 1);
    if (total > static_cast<double>(options.exhaustive_limit)) {
      throw Error(ErrorKind::kSizeGuard, "exhaustive validation needs " +
                                             std::to_string(static_cast<long long>(total)) +
                                             " evidence sets; use --samples");
    }
    std::vector<std::size_t> digit(net.size(), 0);
    for (;;) {
      Evidence ev;
      for (std::size_t k = 0; k < net.size(); ++k) {
        if (digit[k] > 0) ev.set(net.variable(NodeId(k)).label, digit[k] - 1);
      }
      bool possible = true;
      try {
        condition(table, net, ev);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kZeroProbability) throw;
        possible = false;
      }
      if (possible) cases.push_back(std::move(ev));
      std::size_t k = net.size();
      while (k-- > 0) {
        if (++digit[k] <= net.variable(NodeId(k)).cardinality()) break;
        digit[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  }

  QuerySession session(tree);
  std::size_t engine_errors = 0;
  for (const Evidence& ev : cases) {
    ++report.cases;
    const JointTable post = condition(table, net, ev);
    try {
      QuerySession incremental(tree);
      incremental.multi_evidence_simq(ev);
      for (const auto& var : net.variables()) {
        const Vector exact = marginal_over(post, {net.require(var.label)});
        const double misq_err = max_abs_diff(session.query(var.label, ev).probs(), exact);
        const double simq_err =
            max_abs_diff(incremental.variable_distribution(var.label).probs(), exact);
        const double err = std::max(misq_err, simq_err);
        if (err > report.max_posterior_error) {
          report.max_posterior_error = err;
          report.worst_case = var.label + " given " + describe(ev);
        }
      }
    } catch (const Error& err) {
      // An inconsistent tree can fail inside propagation; that is a finding, not a crash.
      if (err.kind() != ErrorKind::kRange && err.kind() != ErrorKind::kZeroProbability &&
          err.kind() != ErrorKind::kSingularWeight && err.kind() != ErrorKind::kPrunedState) {
        throw;
      }
      ++engine_errors;
      if (engine_errors <= 5) {
        report.failures.push_back("inference failed given " + describe(ev) + ": " + err.what());
      }
      session = QuerySession(tree);
    }
  }
  if (engine_errors > 5) {
    report.failures.push_back(std::to_string(engine_errors - 5) + " more inference failures");
  }
  if (report.max_posterior_error > options.tolerance) {
    std::ostringstream os;
    os << "posterior of " << report.worst_case << " differs from enumeration by "
       << report.max_posterior_error;
    report.failures.push_back(os.str());
  }
  report.passed = report.failures.empty();
  return report;
}

}  // namespace sensnet
