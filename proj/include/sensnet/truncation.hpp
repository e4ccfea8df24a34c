#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sensnet/engine.hpp"
#include "sensnet/tree.hpp"

namespace sensnet {

struct DecayProfile {
  double alpha = 0.9;
  double eta = 0.09;
  double epsilon = 0.1;

  // Throws kApproxPrecondition unless alpha, epsilon in (0,1) and eta in (0, .25].
  void check_ranges() const;
};

struct ProfileCheck {
  bool ok = true;
  std::string witness;
  std::optional<std::size_t> edge;
  std::optional<std::size_t> node;
};

// Requires every node binary (throws kApproxPrecondition otherwise). Each edge
// must have |S| < alpha in both directions and each node p(not i)p(i) > eta.
ProfileCheck verify_profile(const TreeNetwork& tree, const DecayProfile& profile);

// A profile known to hold on one tree. Only verify() creates one.
class VerifiedProfile {
 public:
  // Throws kApproxPrecondition with the witness when the check fails.
  static VerifiedProfile verify(const TreeNetwork& tree, const DecayProfile& profile);

  const DecayProfile& profile() const { return profile_; }
  const TreeNetwork& tree() const { return *tree_; }

 private:
  VerifiedProfile(const TreeNetwork& tree, DecayProfile profile)
      : tree_(&tree), profile_(profile) {}

  const TreeNetwork* tree_;
  DecayProfile profile_;
};

// ceil(log_alpha(eta * epsilon / (2 N))); 0 without evidence.
std::size_t truncation_radius(const DecayProfile& profile, std::size_t n_evidence);

struct TruncationPlan {
  std::size_t radius = 0;
  std::vector<std::string> retained_evidence;
  double guaranteed_bound = 0.0;
};

TruncationPlan plan_truncation(const VerifiedProfile& profile, std::size_t query_node,
                               const Evidence& evidence);

struct ApproxResult {
  Distribution posterior;
  double bound = 0.0;
  TruncationPlan plan;
};

ApproxResult truncated_query(QuerySession& session, const std::string& query,
                             const Evidence& evidence, const VerifiedProfile& profile);

}  // namespace sensnet
