#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sensnet/truncation.hpp"

namespace sensnet {

struct BenchOptions {
  std::vector<std::size_t> lengths{50, 200, 800};
  std::vector<double> epsilons{0.1};
  double alpha = 0.5;
  double eta = 0.09;
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  std::size_t evidence = 3;
};

struct BenchRow {
  std::size_t length = 0;
  double epsilon = 0.0;
  std::size_t radius = 0;
  std::size_t nodes_touched = 0;
  double seconds_per_query = 0.0;
  double max_relative_error = 0.0;
  double bound = 0.0;
  std::size_t violations = 0;
};

// Chains of each length with the query at the centre and evidence at seeded
// offsets that do not depend on the length, so the touched region is the same
// for every length.
std::vector<BenchRow> run_bench(const BenchOptions& options);
void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows);

struct TrialSummary {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t checked_states = 0;
  // Trials where some evidence lay beyond the radius.
  std::size_t truncated_trials = 0;
  double max_relative_error = 0.0;
  double bound = 0.0;
  std::size_t radius = 0;
  std::size_t max_edge_traversals = 0;
  std::size_t length_mismatches = 0;
};

// Randomized check of the truncation bound: random chains, random query and
// evidence positions anywhere on the chain, exact answer from the full query.
TrialSummary run_truncation_trials(std::size_t length, std::size_t trials,
                                   const DecayProfile& profile, std::size_t n_evidence,
                                   std::uint64_t seed, std::size_t threads = 0);

// Largest |approx - exact| / exact over states whose exact probability is >= eta.
double relative_error(const Distribution& approx, const Distribution& exact, double eta,
                      std::size_t* checked = nullptr);

}  // namespace sensnet
