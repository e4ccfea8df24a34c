#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sensnet/bench.hpp"
#include "sensnet/cli.hpp"
#include "sensnet/compiler.hpp"
#include "sensnet/engine.hpp"
#include "sensnet/error.hpp"
#include "sensnet/io.hpp"
#include "sensnet/oracle.hpp"
#include "sensnet/sensitivity.hpp"
#include "sensnet/truncation.hpp"
#include "sensnet/validation.hpp"

namespace py = pybind11;
using namespace sensnet;

namespace {

Evidence to_evidence(const std::map<std::string, std::size_t>& items) {
  Evidence ev;
  for (const auto& [label, state] : items) ev.set(label, state);
  return ev;
}

template <class T, class F>
std::string render(const T& value, F write) {
  std::ostringstream os;
  write(os, value);
  return os.str();
}

Distribution to_distribution(const Vector& v) { return Distribution(v); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Belief-network inference in sensitivity form";

  static py::exception<Error> error(m, "SensnetError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object instance = exc(std::string(to_string(e.kind())) + ": " + e.what());
      instance.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  py::class_<Variable>(m, "Variable")
      .def_readonly("label", &Variable::label)
      .def_readonly("states", &Variable::states);

  py::class_<BeliefNetwork>(m, "BeliefNetwork")
      .def("__len__", &BeliefNetwork::size)
      .def_property_readonly("labels", [](const BeliefNetwork& n) {
        std::vector<std::string> out;
        for (const auto& v : n.variables()) out.push_back(v.label);
        return out;
      })
      .def("cpt", [](const BeliefNetwork& n, const std::string& l) { return n.cpt(n.require(l)); })
      .def("parents", [](const BeliefNetwork& n, const std::string& l) {
        std::vector<std::string> out;
        for (NodeId p : n.parents(n.require(l))) out.push_back(n.variable(p).label);
        return out;
      })
      .def("violations", [](const BeliefNetwork& n) { return validate_network(n); })
      .def("to_text", [](const BeliefNetwork& n) { return render(n, write_network); });

  py::class_<ClusterPlan>(m, "ClusterPlan")
      .def_readonly("names", &ClusterPlan::names)
      .def_readonly("clusters", &ClusterPlan::clusters)
      .def_readonly("tree_edges", &ClusterPlan::tree_edges);

  py::class_<TreeNetwork>(m, "TreeNetwork")
      .def("__len__", &TreeNetwork::size)
      .def_property_readonly("node_names", [](const TreeNetwork& t) {
        std::vector<std::string> out;
        for (const auto& n : t.nodes()) out.push_back(n.name);
        return out;
      })
      .def("prior", [](const TreeNetwork& t, const std::string& name) {
        return t.node(t.require_node(name)).prior.probs();
      })
      .def("variable_prior",
           [](const TreeNetwork& t, const std::string& l) { return t.variable_prior(l).probs(); })
      .def("pruned_states", [](const TreeNetwork& t, const std::string& name) {
        return t.node(t.require_node(name)).space.pruned_states();
      })
      .def("edge_ranks", [](const TreeNetwork& t) {
        std::map<std::string, std::size_t> out;
        for (std::size_t e = 0; e < t.edges().size(); ++e) out[edge_name(t, e)] = t.edge(e).rank();
        return out;
      })
      .def("edge_factors", [](const TreeNetwork& t, const std::string& child, const std::string& parent) {
        auto e = t.edge_between(t.require_node(child), t.require_node(parent));
        if (!e) throw Error(ErrorKind::kValidation, "nodes are not adjacent");
        const TreeEdge& edge = t.edge(*e);
        const bool fwd = edge.child == t.require_node(child);
        const QRFactors& f = fwd ? edge.forward : edge.backward;
        return py::make_tuple(f.q, f.r);
      })
      .def("to_text", [](const TreeNetwork& t) { return render(t, write_tree); })
      .def("report", [](const TreeNetwork& t) { return render(t, write_report); });

  m.def("load_network", &load_network);
  m.def("load_plan", &load_plan);
  m.def("load_tree", &load_tree);
  m.def("parse_network", [](const std::string& text) {
    std::istringstream in(text);
    return parse_network(in);
  });
  m.def("parse_tree", [](const std::string& text) {
    std::istringstream in(text);
    return parse_tree(in);
  });
  m.def("plan_clusters", [](const BeliefNetwork& n) { return plan_clusters(moralize(n), n); });
  m.def("check_plan", &check_plan);
  m.def(
      "compile",
      [](const BeliefNetwork& n, std::optional<ClusterPlan> plan, double rank_tol) {
        CompileOptions o;
        o.rank_tolerance = rank_tol;
        return compile(n, plan ? *plan : plan_clusters(moralize(n), n), o).first;
      },
      py::arg("network"), py::arg("plan") = py::none(), py::arg("rank_tol") = kRankTolerance);
  m.def("compile_tree_shaped", [](const BeliefNetwork& n) { return compile_tree_shaped(n); });

  py::class_<EngineStats>(m, "EngineStats")
      .def_readonly("messages", &EngineStats::messages)
      .def_readonly("length_mismatches", &EngineStats::length_mismatches)
      .def_readonly("nodes_touched", &EngineStats::nodes_touched)
      .def_readonly("edge_traversals", &EngineStats::edge_traversals)
      .def("max_edge_traversals", &EngineStats::max_edge_traversals);

  py::class_<QuerySession>(m, "QuerySession")
      .def(py::init<const TreeNetwork&>(), py::keep_alive<1, 2>())
      .def(
          "query",
          [](QuerySession& s, const std::string& label, const std::map<std::string, std::size_t>& ev) {
            return s.query(label, to_evidence(ev)).probs();
          },
          py::arg("label"), py::arg("evidence") = std::map<std::string, std::size_t>{})
      .def("instantiate", [](QuerySession& s, const std::string& label, std::size_t state) {
        s.instantiate(label, state);
        s.commit();
      })
      .def("variable_distribution",
           [](const QuerySession& s, const std::string& l) { return s.variable_distribution(l).probs(); })
      .def("distribution", [](const QuerySession& s, const std::string& name) {
        return s.distribution(s.tree().require_node(name)).probs();
      })
      .def("path_sensitivity", [](const QuerySession& s, const std::string& i, const std::string& j) {
        return s.path_sensitivity(s.tree().require_node(i), s.tree().require_node(j));
      })
      .def_property_readonly("stats", &QuerySession::stats)
      .def("reset_stats", &QuerySession::reset_stats);

  m.def("posterior", [](const BeliefNetwork& n, const std::string& label,
                        const std::map<std::string, std::size_t>& ev) {
    return posterior(n, to_evidence(ev), n.require(label)).probs();
  });

  m.def(
      "validate",
      [](const BeliefNetwork& n, const TreeNetwork& t, std::optional<std::size_t> samples,
         std::uint64_t seed) {
        ValidationOptions o;
        o.samples = samples;
        o.seed = seed;
        const ValidationReport r = validate_against_oracle(n, t, o);
        py::dict d;
        d["passed"] = r.passed;
        d["cases"] = r.cases;
        d["max_posterior_error"] = r.max_posterior_error;
        d["max_edge_error"] = r.max_edge_error;
        d["worst_edge"] = r.worst_edge;
        d["failures"] = r.failures;
        return d;
      },
      py::arg("network"), py::arg("tree"), py::arg("samples") = py::none(), py::arg("seed") = 1);

  m.def("cpt_to_sensitivity", [](const Matrix& p) { return cpt_to_sensitivity(ConditionalMatrix(p)); });
  m.def(
      "qr_factor",
      [](const Matrix& s, double tol) {
        const QRFactors f = qr_factor(s, tol);
        return py::make_tuple(f.q, f.r);
      },
      py::arg("s"), py::arg("tol") = kRankTolerance);
  m.def("numerical_rank", &numerical_rank, py::arg("m"), py::arg("tol") = kRankTolerance);
  m.def("reverse_sensitivity", [](const Matrix& s, const Vector& pi, const Vector& pj) {
    return reverse_dense(s, to_distribution(pi), to_distribution(pj));
  });
  m.def("sensitivity_to_cpt", [](const Matrix& s, const Vector& pi, const Vector& pj) {
    return sensitivity_to_cpt(s, to_distribution(pi), to_distribution(pj)).entries();
  });
  m.def("binary_sensitivity",
        [](const Matrix& p) { return binary_sensitivity(ConditionalMatrix(p)).value; });
  m.def("binary_reverse", [](double s, const Vector& pi, const Vector& pj) {
    return binary_reverse({s}, to_distribution(pi), to_distribution(pj)).value;
  });

  m.def("truncation_radius", [](double alpha, double eta, double epsilon, std::size_t n) {
    return truncation_radius(DecayProfile{alpha, eta, epsilon}, n);
  });
  m.def(
      "truncated_query",
      [](const TreeNetwork& t, const std::string& label, const std::map<std::string, std::size_t>& ev,
         double alpha, double eta, double epsilon) {
        const VerifiedProfile v = VerifiedProfile::verify(t, DecayProfile{alpha, eta, epsilon});
        QuerySession s(t);
        const ApproxResult r = truncated_query(s, label, to_evidence(ev), v);
        return py::make_tuple(r.posterior.probs(), r.bound, r.plan.radius);
      },
      py::arg("tree"), py::arg("label"), py::arg("evidence"), py::arg("alpha"), py::arg("eta"),
      py::arg("epsilon"));

  m.def(
      "bench",
      [](std::vector<std::size_t> lengths, std::vector<double> epsilons, double alpha, double eta,
         std::uint64_t seed, std::size_t trials) {
        BenchOptions o;
        o.lengths = std::move(lengths);
        o.epsilons = std::move(epsilons);
        o.alpha = alpha;
        o.eta = eta;
        o.seed = seed;
        o.trials = trials;
        return render(run_bench(o), write_bench_tsv);
      },
      py::arg("lengths"), py::arg("epsilons"), py::arg("alpha") = 0.5, py::arg("eta") = 0.09,
      py::arg("seed") = 1, py::arg("trials") = 5);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "sensnet");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
