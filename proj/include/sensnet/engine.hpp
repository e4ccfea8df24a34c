#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sensnet/tree.hpp"

namespace sensnet {

inline constexpr std::size_t kUnboundedRadius = std::numeric_limits<std::size_t>::max();

struct EngineStats {
  std::size_t messages = 0;
  // Messages whose length differed from the edge rank.
  std::size_t length_mismatches = 0;
  // Messages delivered to a node marked barren.
  std::size_t barren_deliveries = 0;
  std::size_t nodes_touched = 0;
  std::vector<std::size_t> edge_traversals;

  std::size_t max_edge_traversals() const;
};

// Evidence on simple nodes, merged per owning tree node.
std::map<std::size_t, Assignment> group_evidence(const TreeNetwork& tree,
                                                 const Evidence& evidence);

// Mutable inference state over an immutable tree. The tree must outlive the
// session. A session is not safe for concurrent use.
class QuerySession {
 public:
  explicit QuerySession(const TreeNetwork& tree);

  const TreeNetwork& tree() const { return *tree_; }
  Distribution distribution(std::size_t node) const;
  Distribution committed_distribution(std::size_t node) const;
  Distribution variable_distribution(const std::string& label) const;
  const Matrix& working_r(std::size_t at, std::size_t edge) const;
  bool pending() const { return pending_; }

  // Sets the node to the restriction of its current distribution and
  // propagates to every other node. Requires a committed session.
  void instantiate(std::size_t node, const Assignment& values);
  void instantiate(const std::string& label, std::size_t state);
  void simq_step(std::size_t receiver, std::size_t sender, const Vector& y);
  void commit();

  // Incremental instantiate + commit, one label at a time, in `order` (labels
  // of the evidence) or in evidence order when `order` is empty.
  void multi_evidence_simq(const Evidence& evidence, const std::vector<std::string>& order = {});

  // true = barren. Only nodes within `radius` hops of the query are considered.
  std::vector<bool> mark_barren(std::size_t query, const std::map<std::size_t, Assignment>& evidence,
                                std::size_t radius = kUnboundedRadius) const;

  // Posterior of a tree node given the committed state plus `evidence`. The
  // session is left as it was.
  Distribution query(std::size_t query_node, const Evidence& evidence,
                     std::size_t radius = kUnboundedRadius);
  Distribution query(const std::string& label, const Evidence& evidence,
                     std::size_t radius = kUnboundedRadius);

  // S_ij for adjacent nodes from the working factors and current distributions.
  Matrix current_sensitivity(std::size_t i, std::size_t j) const;
  // Product of current sensitivities along the tree path from j to i.
  Matrix path_sensitivity(std::size_t i, std::size_t j) const;

  const EngineStats& stats() const { return stats_; }
  void reset_stats();

 private:
  Matrix& r_at(std::size_t at, std::size_t edge);
  void receive(std::size_t node, std::size_t edge, const Vector& y);
  void send_simq(std::size_t from, std::size_t edge);
  Vector misq(std::size_t node, std::size_t above_edge, const Vector& y);
  void rollback();
  void touch(std::size_t node);
  void save_p(std::size_t node);
  void save_r(std::size_t at, std::size_t edge);
  Vector settle(Vector p, std::size_t node) const;

  const TreeNetwork* tree_;
  std::vector<Vector> p_;
  std::vector<Vector> p0_;
  // Per edge: [0] stored at the parent, [1] stored at the child.
  std::vector<std::array<Matrix, 2>> r_;
  bool pending_ = false;
  EngineStats stats_;

  // State of the running misq call.
  const std::map<std::size_t, Assignment>* instantiated_ = nullptr;
  const std::vector<bool>* barren_ = nullptr;
  std::vector<std::uint32_t> touched_epoch_;
  std::uint32_t epoch_ = 0;
  bool logging_ = false;
  std::vector<std::pair<std::size_t, Vector>> p_log_;
  std::vector<std::tuple<std::size_t, std::size_t, Matrix>> r_log_;
};

}  // namespace sensnet
