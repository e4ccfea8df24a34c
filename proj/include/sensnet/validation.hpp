#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sensnet/network.hpp"
#include "sensnet/tree.hpp"

namespace sensnet {

struct ValidationOptions {
  // Random evidence sets instead of every one.
  std::optional<std::size_t> samples;
  std::uint64_t seed = 1;
  std::size_t max_evidence = 4;
  // Exhaustive mode refuses more evidence sets than this.
  std::size_t exhaustive_limit = 200000;
  double tolerance = 1e-9;
};

struct ValidationReport {
  bool passed = true;
  std::size_t cases = 0;
  double max_prior_error = 0.0;
  double max_edge_error = 0.0;
  std::string worst_edge;
  double max_posterior_error = 0.0;
  std::string worst_case;
  std::vector<std::string> failures;
};

// Compares priors, every edge's sensitivity and the misq and simq posteriors of
// every variable against enumeration. Throws kSizeGuard when exhaustive mode
// would be too large.
ValidationReport validate_against_oracle(const BeliefNetwork& net, const TreeNetwork& tree,
                                         const ValidationOptions& options = {});

}  // namespace sensnet
