#include "sensnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <set>

#include "sensnet/compiler.hpp"
#include "sensnet/random_networks.hpp"

namespace sensnet {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string label(std::size_t index) { return "x" + std::to_string(index + 1); }

}  // namespace

double relative_error(const Distribution& approx, const Distribution& exact, double eta,
                      std::size_t* checked) {
  double worst = 0.0;
  for (std::size_t s = 0; s < exact.size(); ++s) {
    if (exact[s] < eta) continue;
    if (checked) ++*checked;
    worst = std::max(worst, std::abs(approx[s] - exact[s]) / exact[s]);
  }
  return worst;
}

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  const DecayProfile base{options.alpha, options.eta, 0.5};
  base.check_ranges();
  for (std::size_t length : options.lengths) {
    for (double epsilon : options.epsilons) {
      DecayProfile profile = base;
      profile.epsilon = epsilon;
      BenchRow row;
      row.length = length;
      row.epsilon = epsilon;
      row.radius = truncation_radius(profile, options.evidence);
      row.bound = std::expm1(epsilon);
      const std::size_t centre = length / 2;
      const std::size_t window =
          std::min<std::size_t>(row.radius + 6, centre > 0 ? centre - 1 : 0);
      double seconds = 0.0;
      for (std::size_t t = 0; t < options.trials; ++t) {
        Rng chain_rng(mix(options.seed, length, t));
        const BeliefNetwork net =
            random_decay_chain(chain_rng, length, options.alpha, options.eta);
        const TreeNetwork tree = compile_tree_shaped(net);
        const VerifiedProfile verified = VerifiedProfile::verify(tree, profile);
        // Offsets come from a stream that ignores the chain length.
        Rng offset_rng(mix(options.seed, 0xbe4c, t));
        std::uniform_int_distribution<long> offset(-static_cast<long>(window),
                                                   static_cast<long>(window));
        std::bernoulli_distribution coin(0.5);
        Evidence ev;
        std::set<long> used{0};
        while (ev.size() < std::min<std::size_t>(options.evidence, 2 * window)) {
          const long d = offset(offset_rng);
          const bool state = coin(offset_rng);
          if (!used.insert(d).second) continue;
          ev.set(label(static_cast<std::size_t>(static_cast<long>(centre) + d)), state ? 1 : 0);
        }
        QuerySession session(tree);
        const Distribution exact = session.query(label(centre), ev);
        session.reset_stats();
        const auto start = std::chrono::steady_clock::now();
        const ApproxResult approx = truncated_query(session, label(centre), ev, verified);
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.nodes_touched = std::max(row.nodes_touched, session.stats().nodes_touched);
        const double err = relative_error(approx.posterior, exact, options.eta);
        row.max_relative_error = std::max(row.max_relative_error, err);
        if (err > row.bound) ++row.violations;
      }
      row.seconds_per_query = options.trials ? seconds / static_cast<double>(options.trials) : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "size\tepsilon\tradius\tnodes_touched\twall_seconds\tmax_relative_error\tbound\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6g\t%zu\t%zu\t%.3e\t%.6e\t%.6f\n", r.length, r.epsilon,
                  r.radius, r.nodes_touched, r.seconds_per_query, r.max_relative_error, r.bound);
    out << buf;
  }
}

TrialSummary run_truncation_trials(std::size_t length, std::size_t trials,
                                   const DecayProfile& profile, std::size_t n_evidence,
                                   std::uint64_t seed, std::size_t threads) {
  TrialSummary summary;
  summary.trials = trials;
  summary.bound = std::expm1(profile.epsilon);
  summary.radius = truncation_radius(profile, n_evidence);
  std::mutex lock;
  parallel_for(
      trials,
      [&](std::size_t t) {
        Rng rng(mix(seed, length, t));
        const BeliefNetwork net = random_decay_chain(rng, length, profile.alpha, profile.eta);
        const TreeNetwork tree = compile_tree_shaped(net);
        const VerifiedProfile verified = VerifiedProfile::verify(tree, profile);
        std::uniform_int_distribution<std::size_t> position(0, length - 1);
        std::bernoulli_distribution coin(0.5);
        const std::size_t query = position(rng);
        Evidence ev;
        std::set<std::size_t> used{query};
        while (ev.size() < std::min(n_evidence, length - 1)) {
          const std::size_t p = position(rng);
          const bool state = coin(rng);
          if (used.insert(p).second) ev.set(label(p), state ? 1 : 0);
        }
        QuerySession session(tree);
        const Distribution exact = session.query(label(query), ev);
        const ApproxResult approx = truncated_query(session, label(query), ev, verified);
        std::size_t checked = 0;
        const double err = relative_error(approx.posterior, exact, profile.eta, &checked);
        std::lock_guard<std::mutex> guard(lock);
        summary.checked_states += checked;
        if (approx.plan.retained_evidence.size() < ev.size()) ++summary.truncated_trials;
        summary.max_relative_error = std::max(summary.max_relative_error, err);
        if (err > summary.bound) ++summary.violations;
        summary.max_edge_traversals =
            std::max(summary.max_edge_traversals, session.stats().max_edge_traversals());
        summary.length_mismatches += session.stats().length_mismatches;
      },
      threads);
  return summary;
}

}  // namespace sensnet
