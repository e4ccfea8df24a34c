#include "sensnet/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sensnet/bench.hpp"
#include "sensnet/compiler.hpp"
#include "sensnet/engine.hpp"
#include "sensnet/error.hpp"
#include "sensnet/io.hpp"
#include "sensnet/oracle.hpp"
#include "sensnet/truncation.hpp"
#include "sensnet/validation.hpp"

namespace sensnet {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<std::string, std::string> split_pair(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
    throw Error(ErrorKind::kParse, "expected name=value, got '" + item + "'");
  }
  return {item.substr(0, eq), item.substr(eq + 1)};
}

Evidence parse_evidence(const std::vector<std::string>& args,
                        const std::vector<Variable>& variables) {
  Evidence ev;
  for (const auto& arg : args) {
    for (const auto& item : split(arg, ',')) {
      auto [label, value] = split_pair(item);
      const Variable* var = nullptr;
      for (const auto& v : variables) {
        if (v.label == label) var = &v;
      }
      if (!var) throw Error(ErrorKind::kUnknownLabel, "unknown variable " + label);
      ev.set(label, var->state_index(value));
    }
  }
  return ev;
}

DecayProfile parse_profile(const std::vector<std::string>& args) {
  DecayProfile profile;
  for (const auto& arg : args) {
    for (const auto& item : split(arg, ',')) {
      auto [key, value] = split_pair(item);
      const double v = parse_number(value);
      if (key == "epsilon" || key == "eps") profile.epsilon = v;
      else if (key == "alpha") profile.alpha = v;
      else if (key == "eta") profile.eta = v;
      else throw Error(ErrorKind::kParse, "unknown approximation parameter " + key);
    }
  }
  profile.check_ranges();
  return profile;
}

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  // Avoid printing "-0.000000".
  if (std::string(buf).find_first_not_of("-0.") == std::string::npos) {
    std::snprintf(buf, sizeof buf, "%.*f", places, 0.0);
  }
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw Error(ErrorKind::kParse, "cannot write " + path);
  file << text;
}

bool tree_shaped(const BeliefNetwork& net) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.parents(NodeId(i)).size() > 1) return false;
  }
  return true;
}

struct CompileArgs {
  std::string network;
  std::string plan;
  std::string output;
  double rank_tol = kRankTolerance;
  double prune = 1e-12;
};

int cmd_compile(const CompileArgs& a, std::ostream& out, std::ostream& err) {
  const BeliefNetwork net = load_network(a.network);
  CompileOptions options;
  options.rank_tolerance = a.rank_tol;
  options.prune_threshold = a.prune;

  TreeNetwork tree = [&] {
    if (!a.plan.empty()) return compile(net, load_plan(a.plan), options).first;
    const auto violations = validate_network(net);
    if (!violations.empty()) throw Error(ErrorKind::kValidation, violations.front());
    // Tree-shaped DAGs compile without the joint table, so long chains work.
    if (tree_shaped(net)) return compile_tree_shaped(net, options);
    return compile(net, plan_clusters(moralize(net), net), options).first;
  }();

  std::ostringstream file;
  write_tree(file, tree);
  std::ostringstream report;
  write_report(report, tree);
  if (a.output.empty()) {
    out << file.str();
    err << report.str();
  } else {
    write_text(a.output, file.str());
    out << report.str();
  }
  return 0;
}

struct QueryArgs {
  std::string tree;
  std::string query;
  std::vector<std::string> evidence;
  std::string engine = "misq";
  std::string network;
  std::vector<std::string> approx;
};

std::vector<std::string> compound_state_names(const TreeNetwork& tree, std::size_t node) {
  const StateSpace& space = tree.node(node).space;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < space.cardinality(); ++c) {
    std::string name;
    for (std::size_t m = 0; m < space.members().size(); ++m) {
      const Variable& v = tree.variable(space.members()[m]);
      if (m) name += ",";
      name += v.label + "=" + v.states[space.member_value(space.original_of(c), m)];
    }
    names.push_back(name);
  }
  return names;
}

int cmd_query(const QueryArgs& a, std::ostream& out) {
  const TreeNetwork tree = load_tree(a.tree);
  const Evidence ev = parse_evidence(a.evidence, tree.variables());

  const auto node = tree.find_node(a.query);
  bool is_variable = false;
  for (const auto& v : tree.variables()) is_variable |= v.label == a.query;
  if (!is_variable && !node) throw Error(ErrorKind::kUnknownLabel, "unknown query " + a.query);

  std::vector<std::string> state_names;
  Distribution prior;
  if (is_variable) {
    state_names = tree.variable(a.query).states;
    prior = tree.variable_prior(a.query);
  } else {
    state_names = compound_state_names(tree, *node);
    prior = tree.node(*node).prior;
  }

  QuerySession session(tree);
  Distribution post;
  std::string mode = "exact";
  std::optional<ApproxResult> approx;

  if (!a.approx.empty()) {
    if (!is_variable) {
      throw Error(ErrorKind::kApproxPrecondition, "approximate queries take a variable label");
    }
    const VerifiedProfile verified = VerifiedProfile::verify(tree, parse_profile(a.approx));
    approx = truncated_query(session, a.query, ev, verified);
    post = approx->posterior;
    mode = "approx";
  } else if (a.engine == "misq") {
    post = is_variable ? session.query(a.query, ev) : session.query(*node, ev);
  } else if (a.engine == "simq") {
    session.multi_evidence_simq(ev);
    post = is_variable ? session.variable_distribution(a.query) : session.distribution(*node);
  } else if (a.engine == "oracle") {
    if (a.network.empty()) throw Error(ErrorKind::kValidation, "--engine oracle needs --network");
    if (!is_variable) throw Error(ErrorKind::kValidation, "--engine oracle takes a variable label");
    const BeliefNetwork net = load_network(a.network);
    const NodeId id = net.require(a.query);
    post = posterior(net, ev, id);
    prior = posterior(net, Evidence{}, id);
  } else {
    throw Error(ErrorKind::kParse, "unknown engine " + a.engine);
  }

  out << "query " << a.query << "\n";
  out << "engine " << (approx ? "misq" : a.engine) << "\n";
  out << "mode " << mode << "\n";
  out << "evidence";
  if (ev.empty()) out << " none";
  for (const auto& [label, state] : ev.items()) {
    out << " " << label << "=" << tree.variable(label).states[state];
  }
  out << "\n";
  if (approx) {
    out << "bound " << fixed(approx->bound, 6) << "\n";
    out << "radius " << approx->plan.radius << "\n";
    out << "retained";
    if (approx->plan.retained_evidence.empty()) out << " none";
    for (const auto& l : approx->plan.retained_evidence) out << " " << l;
    out << "\n";
  }
  out << "state\tposterior\tprior\tdelta\n";
  for (std::size_t s = 0; s < post.size(); ++s) {
    const double delta = post[s] - prior[s];
    out << state_names[s] << "\t" << fixed(post[s], 6) << "\t" << fixed(prior[s], 6) << "\t"
        << sci(delta) << "\n";
  }
  if (a.engine != "oracle" || approx) {
    const EngineStats& st = session.stats();
    std::size_t traversed = 0;
    for (auto t : st.edge_traversals) traversed += t;
    out << "messages " << st.messages << "\n";
    out << "message_length_mismatches " << st.length_mismatches << "\n";
    out << "edges_traversed " << traversed << "\n";
    out << "max_traversals_per_edge " << st.max_edge_traversals() << "\n";
    out << "nodes_touched " << st.nodes_touched << "\n";
    out << "ranks";
    for (std::size_t e = 0; e < tree.edges().size(); ++e) {
      out << " " << edge_name(tree, e) << ":" << tree.edge(e).rank();
    }
    out << "\n";
  }
  return 0;
}

struct ValidateArgs {
  std::string network;
  std::string tree;
  std::optional<std::size_t> samples;
  std::uint64_t seed = 1;
  std::size_t max_evidence = 4;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const BeliefNetwork net = load_network(a.network);
  const TreeNetwork tree = load_tree(a.tree);
  ValidationOptions options;
  options.samples = a.samples;
  options.seed = a.seed;
  options.max_evidence = a.max_evidence;
  const ValidationReport r = validate_against_oracle(net, tree, options);
  out << (r.passed ? "PASS" : "FAIL") << "\n";
  out << "cases " << r.cases << "\n";
  out << "max_prior_error " << sci(r.max_prior_error) << "\n";
  out << "max_edge_error " << sci(r.max_edge_error);
  if (!r.worst_edge.empty()) out << " (" << r.worst_edge << ")";
  out << "\n";
  out << "max_posterior_error " << sci(r.max_posterior_error);
  if (!r.worst_case.empty()) out << " (" << r.worst_case << ")";
  out << "\n";
  for (const auto& f : r.failures) out << "failure: " << f << "\n";
  return r.passed ? 0 : exit_code(ErrorKind::kValidation);
}

struct BenchArgs {
  std::string lengths = "50,200,800";
  std::string epsilons = "0.1";
  BenchOptions options;
  std::string output;
};

int cmd_bench(BenchArgs a, std::ostream& out) {
  a.options.lengths.clear();
  for (const auto& t : split(a.lengths, ',')) {
    const double v = parse_number(t);
    if (v < 2 || v != std::floor(v)) throw Error(ErrorKind::kParse, "bad chain length " + t);
    a.options.lengths.push_back(static_cast<std::size_t>(v));
  }
  a.options.epsilons.clear();
  for (const auto& t : split(a.epsilons, ',')) a.options.epsilons.push_back(parse_number(t));
  for (double e : a.options.epsilons) {
    DecayProfile{a.options.alpha, a.options.eta, e}.check_ranges();
  }
  const auto rows = run_bench(a.options);
  std::ostringstream tsv;
  write_bench_tsv(tsv, rows);
  if (a.output.empty()) out << tsv.str();
  else write_text(a.output, tsv.str());
  return 0;
}

int cmd_report(const std::string& path, std::ostream& out) {
  write_report(out, load_tree(path));
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference over tree-structured belief networks in sensitivity form"};
  app.require_subcommand(1);

  CompileArgs ca;
  auto* compile_cmd = app.add_subcommand("compile", "Compile a network into a tree file");
  compile_cmd->add_option("network", ca.network, "Network file")->required();
  compile_cmd->add_option("--plan", ca.plan, "Cluster plan file");
  compile_cmd->add_option("--rank-tol", ca.rank_tol, "Relative rank tolerance");
  compile_cmd->add_option("--prune", ca.prune, "Prune states with prior <= this");
  compile_cmd->add_option("-o,--output", ca.output, "Output tree file");

  QueryArgs qa;
  auto* query_cmd = app.add_subcommand("query", "Posterior of one node");
  query_cmd->add_option("tree", qa.tree, "Compiled tree file")->required();
  query_cmd->add_option("--query", qa.query, "Variable label or tree node name")->required();
  query_cmd->add_option("--evidence", qa.evidence, "label=state[,label=state...]");
  query_cmd->add_option("--engine", qa.engine, "misq, simq or oracle")
      ->check(CLI::IsMember({"misq", "simq", "oracle"}));
  query_cmd->add_option("--network", qa.network, "Original network (oracle engine)");
  query_cmd->add_option("--approx", qa.approx, "epsilon=e,alpha=a,eta=h");

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "Compare a tree file with enumeration");
  validate_cmd->add_option("network", va.network, "Network file")->required();
  validate_cmd->add_option("tree", va.tree, "Compiled tree file")->required();
  validate_cmd->add_option("--samples", va.samples, "Random evidence sets instead of all");
  validate_cmd->add_option("--seed", va.seed, "Seed for --samples");
  validate_cmd->add_option("--max-evidence", va.max_evidence, "Largest evidence set");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Truncated queries on random chains");
  bench_cmd->add_option("--lengths", ba.lengths, "Chain lengths");
  bench_cmd->add_option("--epsilons", ba.epsilons, "Error levels");
  bench_cmd->add_option("--alpha", ba.options.alpha, "Sensitivity decay bound");
  bench_cmd->add_option("--eta", ba.options.eta, "Prior floor on p(1-p)");
  bench_cmd->add_option("--seed", ba.options.seed, "Seed");
  bench_cmd->add_option("--trials", ba.options.trials, "Queries per row");
  bench_cmd->add_option("--evidence", ba.options.evidence, "Evidence nodes per query");
  bench_cmd->add_option("-o,--output", ba.output, "Write the table here");

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "Print priors and factors");
  report_cmd->add_option("tree", report_path, "Compiled tree file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*compile_cmd) return cmd_compile(ca, out, err);
    if (*query_cmd) return cmd_query(qa, out);
    if (*validate_cmd) return cmd_validate(va, out);
    if (*bench_cmd) return cmd_bench(ba, out);
    if (*report_cmd) return cmd_report(report_path, out);
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sensnet
