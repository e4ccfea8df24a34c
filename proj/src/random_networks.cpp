#include "sensnet/random_networks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "sensnet/error.hpp"

namespace sensnet {

Vector random_distribution(Rng& rng, Eigen::Index size, double floor) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(size);
  for (Eigen::Index k = 0; k < size; ++k) v(k) = floor + u(rng);
  return v / v.sum();
}

Matrix random_cpt(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index distinct) {
  Matrix m(rows, cols);
  if (distinct <= 0 || distinct >= cols) {
    for (Eigen::Index c = 0; c < cols; ++c) m.col(c) = random_distribution(rng, rows);
    return m;
  }
  Matrix basis(rows, distinct);
  for (Eigen::Index c = 0; c < distinct; ++c) basis.col(c) = random_distribution(rng, rows);
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(cols));
  for (Eigen::Index c = 0; c < cols; ++c) pick[static_cast<std::size_t>(c)] = c % distinct;
  std::shuffle(pick.begin(), pick.end(), rng);
  for (Eigen::Index c = 0; c < cols; ++c) m.col(c) = basis.col(pick[static_cast<std::size_t>(c)]);
  return m;
}

BeliefNetwork random_tree_network(Rng& rng, std::size_t nodes) {
  BeliefNetwork net;
  for (std::size_t i = 0; i < nodes; ++i) {
    const NodeId id = net.add_node("x" + std::to_string(i + 1), {"false", "true"});
    if (i == 0) {
      net.set_cpt(id, random_cpt(rng, 2, 1));
      continue;
    }
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    net.set_parents(id, {NodeId(parent(rng))});
    net.set_cpt(id, random_cpt(rng, 2, 2));
  }
  return net;
}

BeliefNetwork random_dag(Rng& rng, std::size_t nodes, std::size_t max_parents,
                         std::size_t max_states) {
  BeliefNetwork net;
  std::uniform_int_distribution<std::size_t> states(2, std::max<std::size_t>(2, max_states));
  for (std::size_t i = 0; i < nodes; ++i) {
    std::vector<std::string> names;
    const std::size_t card = states(rng);
    for (std::size_t s = 0; s < card; ++s) names.push_back("s" + std::to_string(s));
    const NodeId id = net.add_node("x" + std::to_string(i + 1), names);
    std::vector<std::size_t> candidates(i);
    for (std::size_t k = 0; k < i; ++k) candidates[k] = k;
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::uniform_int_distribution<std::size_t> count(0, std::min(max_parents, i));
    candidates.resize(count(rng));
    std::sort(candidates.begin(), candidates.end());
    std::vector<NodeId> parents;
    for (std::size_t p : candidates) parents.emplace_back(p);
    net.set_parents(id, parents);
    net.set_cpt(id, random_cpt(rng, static_cast<Eigen::Index>(card),
                               static_cast<Eigen::Index>(net.parent_configurations(id))));
  }
  return net;
}

ClusterPlan random_grouping_plan(Rng& rng, const BeliefNetwork& tree_net, std::size_t max_groups) {
  const std::size_t n = tree_net.size();
  std::vector<std::size_t> group(n);
  for (std::size_t i = 0; i < n; ++i) group[i] = i;
  std::vector<bool> merged(n, false);
  std::uniform_int_distribution<std::size_t> groups(0, max_groups);
  const std::size_t wanted = groups(rng);
  for (std::size_t g = 0; g < wanted && n > 1; ++g) {
    std::uniform_int_distribution<std::size_t> pick(1, n - 1);
    const std::size_t child = pick(rng);
    const std::size_t parent = tree_net.parents(NodeId(child)).front().index();
    if (merged[child] || merged[parent]) continue;
    merged[child] = merged[parent] = true;
    group[child] = parent;
    // Sometimes pull in one more child of the same parent or of the child.
    std::bernoulli_distribution third(0.5);
    if (third(rng)) {
      for (std::size_t k = 1; k < n; ++k) {
        const std::size_t pk = tree_net.parents(NodeId(k)).front().index();
        if (!merged[k] && (pk == parent || pk == child)) {
          merged[k] = true;
          group[k] = parent;
          break;
        }
      }
    }
  }
  // Clusters in order of their representative; members in declaration order.
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] == i) reps.push_back(i);
  }
  std::vector<std::size_t> cluster_of(n);
  ClusterPlan plan;
  for (std::size_t c = 0; c < reps.size(); ++c) {
    plan.names.push_back("X_" + std::to_string(c + 1));
    plan.clusters.emplace_back();
    for (std::size_t i = 0; i < n; ++i) {
      if (group[i] == reps[c]) {
        plan.clusters.back().push_back(tree_net.variable(NodeId(i)).label);
        cluster_of[i] = c;
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t p = tree_net.parents(NodeId(i)).front().index();
    if (cluster_of[i] != cluster_of[p]) plan.tree_edges.emplace_back(cluster_of[i], cluster_of[p]);
  }
  return plan;
}

BeliefNetwork random_decay_chain(Rng& rng, std::size_t length, double alpha, double eta) {
  // p(1-p) > eta  <=>  p strictly inside (lo, 1 - lo).
  const double lo = 0.5 - std::sqrt(0.25 - eta);
  std::uniform_real_distribution<double> marginal(lo, 1.0 - lo);
  std::uniform_real_distribution<double> slope(-alpha, alpha);
  BeliefNetwork net;
  double p_prev = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const NodeId id = net.add_node("x" + std::to_string(i + 1), {"false", "true"});
    if (i == 0) {
      double p;
      do p = marginal(rng); while (!(p * (1 - p) > eta));
      Matrix cpt(2, 1);
      cpt << 1 - p, p;
      net.set_cpt(id, cpt);
      p_prev = p;
      continue;
    }
    net.set_parents(id, {NodeId(i - 1)});
    for (;;) {
      const double p = marginal(rng);
      const double s = slope(rng);
      const double a = p - s * p_prev;  // p(i | not j)
      const double b = a + s;           // p(i | j)
      if (!(p * (1 - p) > eta) || a < 0 || a > 1 || b < 0 || b > 1) continue;
      const double back = p_prev * (1 - p_prev) / (p * (1 - p)) * s;
      if (!(std::abs(s) < alpha && std::abs(back) < alpha)) continue;
      Matrix cpt(2, 2);
      cpt << 1 - a, 1 - b, a, b;
      net.set_cpt(id, cpt);
      p_prev = p;
      break;
    }
  }
  return net;
}

Evidence random_evidence(Rng& rng, const BeliefNetwork& net, std::size_t max_size) {
  std::vector<std::size_t> order(net.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> count(0, std::min(max_size, net.size()));
  order.resize(count(rng));
  Evidence ev;
  for (std::size_t k : order) {
    const auto& var = net.variable(NodeId(k));
    std::uniform_int_distribution<std::size_t> state(0, var.cardinality() - 1);
    ev.set(var.label, state(rng));
  }
  return ev;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sensnet
