#include "sensnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "sensnet/error.hpp"

namespace sensnet {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : source_(std::move(source)) {
    std::string text;
    std::size_t number = 0;
    while (std::getline(in, text)) {
      ++number;
      if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
      std::istringstream ss(text);
      Line line{number, {}};
      for (std::string tok; ss >> tok;) line.tokens.push_back(tok);
      if (!line.tokens.empty()) lines_.push_back(std::move(line));
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  const Line& next() {
    if (done()) fail(last_number(), "unexpected end of file");
    return lines_[pos_++];
  }
  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw Error(ErrorKind::kParse, source_ + ":" + std::to_string(line) + ": " + what);
  }
  std::size_t last_number() const { return lines_.empty() ? 0 : lines_.back().number; }

  void expect_header(const std::string& magic) {
    if (done()) fail(0, "empty file, expected '" + magic + " 1'");
    const Line& l = next();
    if (l.tokens.size() != 2 || l.tokens[0] != magic || l.tokens[1] != "1") {
      fail(l.number, "expected header '" + magic + " 1'");
    }
  }

  double number(const Line& l, const std::string& tok) const {
    try {
      return parse_number(tok);
    } catch (const Error& e) {
      fail(l.number, e.what());
    }
  }

  std::size_t count(const Line& l, const std::string& tok) const {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || tok.empty() || tok[0] == '-') {
      fail(l.number, "expected a non-negative integer, got '" + tok + "'");
    }
    return static_cast<std::size_t>(v);
  }

  Matrix matrix(std::size_t rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t a = 0; a < rows; ++a) {
      const Line& l = next();
      if (l.tokens.size() != cols) {
        fail(l.number, "expected " + std::to_string(cols) + " values, got " +
                           std::to_string(l.tokens.size()));
      }
      for (std::size_t b = 0; b < cols; ++b) {
        m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = number(l, l.tokens[b]);
      }
    }
    return m;
  }

  // "<tag> <rows> <cols>" followed by the rows.
  Matrix block(const std::string& tag) {
    const Line& l = next();
    if (l.tokens.size() != 3 || l.tokens[0] != tag) {
      fail(l.number, "expected '" + tag + " <rows> <cols>'");
    }
    return matrix(count(l, l.tokens[1]), count(l, l.tokens[2]));
  }

  bool peek_is(const std::string& keyword) const {
    return !done() && lines_[pos_].tokens[0] == keyword;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& out, const std::string& tag, const Matrix& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    out << ' ';
    for (Eigen::Index b = 0; b < m.cols(); ++b) out << ' ' << fmt(m(a, b));
    out << '\n';
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(resolve_path(path));
  if (!in) throw Error(ErrorKind::kParse, "cannot open " + path);
  return in;
}

std::string members_text(const StateSpace& space) {
  std::string out = "{";
  for (std::size_t m = 0; m < space.members().size(); ++m) {
    out += (m ? "," : "") + space.members()[m];
  }
  return out + "}";
}

std::string vector_text(const Eigen::RowVectorXd& v) {
  std::string out = "(";
  for (Eigen::Index k = 0; k < v.size(); ++k) out += (k ? " " : "") + format_table_value(v(k));
  return out + ")";
}

}  // namespace

double parse_number(const std::string& token) {
  std::string body = token;
  double scale = 1.0;
  static const std::string kSqrt2 = "/sqrt2";
  if (body.size() > kSqrt2.size() &&
      body.compare(body.size() - kSqrt2.size(), kSqrt2.size(), kSqrt2) == 0) {
    body.erase(body.size() - kSqrt2.size());
    scale = 1.0 / std::sqrt(2.0);
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(body, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != body.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kParse, "bad number '" + token + "'");
  }
  return v * scale;
}

std::string format_table_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "0.0000" || s == "-0.0000") return "0";
  if (s.rfind("0.", 0) == 0) return s.substr(1);
  if (s.rfind("-0.", 0) == 0) return "-" + s.substr(2);
  return s;
}

std::string resolve_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path) || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("SENSNET_FIXTURES")) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

BeliefNetwork parse_network(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  reader.expect_header("sensnet-network");
  BeliefNetwork net;
  std::map<std::string, std::pair<std::size_t, std::vector<std::string>>> parents;
  std::map<std::string, std::pair<std::size_t, Matrix>> cpts;
  while (!reader.done()) {
    const Line& l = reader.next();
    const std::string& kw = l.tokens[0];
    if (kw == "variable") {
      if (l.tokens.size() < 3) reader.fail(l.number, "variable needs a label and states");
      if (net.find(l.tokens[1])) reader.fail(l.number, "duplicate variable " + l.tokens[1]);
      net.add_node(l.tokens[1], {l.tokens.begin() + 2, l.tokens.end()});
    } else if (kw == "parents") {
      if (l.tokens.size() < 2) reader.fail(l.number, "parents needs a label");
      if (parents.count(l.tokens[1])) reader.fail(l.number, "parents of " + l.tokens[1] + " given twice");
      parents[l.tokens[1]] = {l.number, {l.tokens.begin() + 2, l.tokens.end()}};
    } else if (kw == "cpt") {
      if (l.tokens.size() != 4) reader.fail(l.number, "expected 'cpt <label> <rows> <cols>'");
      if (cpts.count(l.tokens[1])) reader.fail(l.number, "second table for " + l.tokens[1]);
      const std::size_t line = l.number;
      const std::string label = l.tokens[1];
      const std::size_t rows = reader.count(l, l.tokens[2]);
      const std::size_t cols = reader.count(l, l.tokens[3]);
      cpts[label] = {line, reader.matrix(rows, cols)};
    } else {
      reader.fail(l.number, "unknown keyword '" + kw + "'");
    }
  }
  for (const auto& [label, entry] : parents) {
    auto id = net.find(label);
    if (!id) reader.fail(entry.first, "parents given for unknown variable " + label);
    std::vector<NodeId> ids;
    for (const auto& p : entry.second) {
      auto pid = net.find(p);
      if (!pid) reader.fail(entry.first, "unknown parent " + p);
      ids.push_back(*pid);
    }
    net.set_parents(*id, std::move(ids));
  }
  for (auto& [label, entry] : cpts) {
    auto id = net.find(label);
    if (!id) reader.fail(entry.first, "table for unknown variable " + label);
    net.set_cpt(*id, std::move(entry.second));
  }
  for (const auto& var : net.variables()) {
    if (!cpts.count(var.label)) reader.fail(reader.last_number(), "no table for " + var.label);
  }
  return net;
}

BeliefNetwork load_network(const std::string& path) {
  auto in = open_input(path);
  return parse_network(in, path);
}

void write_network(std::ostream& out, const BeliefNetwork& net) {
  out << "sensnet-network 1\n";
  out << "# cpt rows are child states; columns are parent configurations in mixed radix,\n";
  out << "# last parent least significant\n";
  for (const auto& var : net.variables()) {
    out << "variable " << var.label;
    for (const auto& s : var.states) out << ' ' << s;
    out << '\n';
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    const NodeId id(i);
    if (net.parents(id).empty()) continue;
    out << "parents " << net.variable(id).label;
    for (NodeId p : net.parents(id)) out << ' ' << net.variable(p).label;
    out << '\n';
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    write_matrix(out, "cpt " + net.variable(NodeId(i)).label, net.cpt(NodeId(i)));
  }
}

ClusterPlan parse_plan(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  reader.expect_header("sensnet-plan");
  ClusterPlan plan;
  std::vector<std::pair<std::size_t, std::pair<std::string, std::string>>> edges;
  while (!reader.done()) {
    const Line& l = reader.next();
    if (l.tokens[0] == "cluster") {
      if (l.tokens.size() < 3) reader.fail(l.number, "cluster needs a name and members");
      for (const auto& n : plan.names) {
        if (n == l.tokens[1]) reader.fail(l.number, "duplicate cluster " + n);
      }
      plan.names.push_back(l.tokens[1]);
      plan.clusters.emplace_back(l.tokens.begin() + 2, l.tokens.end());
    } else if (l.tokens[0] == "edge") {
      if (l.tokens.size() != 3) reader.fail(l.number, "expected 'edge <child> <parent>'");
      edges.push_back({l.number, {l.tokens[1], l.tokens[2]}});
    } else {
      reader.fail(l.number, "unknown keyword '" + l.tokens[0] + "'");
    }
  }
  auto index = [&](std::size_t line, const std::string& name) {
    for (std::size_t c = 0; c < plan.names.size(); ++c) {
      if (plan.names[c] == name) return c;
    }
    reader.fail(line, "unknown cluster " + name);
  };
  for (const auto& [line, e] : edges) {
    plan.tree_edges.emplace_back(index(line, e.first), index(line, e.second));
  }
  return plan;
}

ClusterPlan load_plan(const std::string& path) {
  auto in = open_input(path);
  return parse_plan(in, path);
}

void write_plan(std::ostream& out, const ClusterPlan& plan) {
  out << "sensnet-plan 1\n";
  for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
    out << "cluster " << (plan.names.empty() ? "X_" + std::to_string(c + 1) : plan.names[c]);
    for (const auto& l : plan.clusters[c]) out << ' ' << l;
    out << '\n';
  }
  for (auto [child, parent] : plan.tree_edges) {
    auto name = [&](std::size_t c) {
      return plan.names.empty() ? "X_" + std::to_string(c + 1) : plan.names[c];
    };
    out << "edge " << name(child) << ' ' << name(parent) << '\n';
  }
}

TreeNetwork parse_tree(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  reader.expect_header("sensnet-tree");
  std::vector<Variable> variables;
  struct PendingNode {
    std::size_t line;
    std::string name;
    std::vector<std::string> members;
    std::vector<std::size_t> pruned;
    std::optional<std::pair<std::size_t, Vector>> prior;
  };
  std::vector<PendingNode> nodes;
  struct PendingEdge {
    std::size_t line;
    std::string child, parent;
    QRFactors forward, backward;
    bool has_backward = false;
  };
  std::vector<PendingEdge> edges;
  auto node_index = [&](std::size_t line, const std::string& name) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].name == name) return i;
    }
    reader.fail(line, "unknown node " + name);
  };
  while (!reader.done()) {
    const Line& l = reader.next();
    const std::string& kw = l.tokens[0];
    if (kw == "variable") {
      if (l.tokens.size() < 3) reader.fail(l.number, "variable needs a label and states");
      variables.push_back({l.tokens[1], {l.tokens.begin() + 2, l.tokens.end()}});
    } else if (kw == "node") {
      if (l.tokens.size() < 3) reader.fail(l.number, "node needs a name and members");
      for (const auto& n : nodes) {
        if (n.name == l.tokens[1]) reader.fail(l.number, "duplicate node " + n.name);
      }
      nodes.push_back({l.number, l.tokens[1], {l.tokens.begin() + 2, l.tokens.end()}, {}, {}});
    } else if (kw == "pruned") {
      if (l.tokens.size() < 2) reader.fail(l.number, "pruned needs a node name");
      auto& node = nodes[node_index(l.number, l.tokens[1])];
      for (std::size_t k = 2; k < l.tokens.size(); ++k) {
        node.pruned.push_back(reader.count(l, l.tokens[k]));
      }
    } else if (kw == "prior") {
      if (l.tokens.size() < 4 || l.tokens[3] != ":") {
        reader.fail(l.number, "expected 'prior <node> <count> : <values>'");
      }
      auto& node = nodes[node_index(l.number, l.tokens[1])];
      const std::size_t count = reader.count(l, l.tokens[2]);
      if (l.tokens.size() != 4 + count) {
        reader.fail(l.number, "prior lists " + std::to_string(l.tokens.size() - 4) +
                                  " values, header says " + std::to_string(count));
      }
      Vector v(static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        v(static_cast<Eigen::Index>(k)) = reader.number(l, l.tokens[4 + k]);
      }
      node.prior = {l.number, std::move(v)};
    } else if (kw == "edge") {
      if (l.tokens.size() != 5 || l.tokens[3] != "rank") {
        reader.fail(l.number, "expected 'edge <child> <parent> rank <r>'");
      }
      PendingEdge e{l.number, l.tokens[1], l.tokens[2], {}, {}, false};
      const std::size_t rank = reader.count(l, l.tokens[4]);
      if (rank == 0) {
        e.forward.q = Matrix(0, 0);
        e.forward.r = Matrix(0, 0);
      } else {
        e.forward.q = reader.block("q");
        e.forward.r = reader.block("r");
        if (static_cast<std::size_t>(e.forward.q.rows()) != rank ||
            static_cast<std::size_t>(e.forward.r.rows()) != rank) {
          reader.fail(l.number, "factor rows do not match rank " + std::to_string(rank));
        }
        if (reader.peek_is("rq")) {
          e.backward.q = reader.block("rq");
          e.backward.r = reader.block("rr");
          e.has_backward = true;
          if (static_cast<std::size_t>(e.backward.q.rows()) != rank ||
              static_cast<std::size_t>(e.backward.r.rows()) != rank) {
            reader.fail(l.number, "reverse factor rows do not match rank " + std::to_string(rank));
          }
        }
      }
      edges.push_back(std::move(e));
    } else {
      reader.fail(l.number, "unknown keyword '" + kw + "'");
    }
  }

  std::vector<CompoundNode> built;
  for (auto& n : nodes) {
    std::vector<std::size_t> radix;
    for (const auto& m : n.members) {
      bool found = false;
      for (const auto& v : variables) {
        if (v.label == m) {
          radix.push_back(v.cardinality());
          found = true;
        }
      }
      if (!found) reader.fail(n.line, "node " + n.name + " uses undeclared variable " + m);
    }
    StateSpace space(n.members, radix);
    try {
      space.prune(n.pruned);
    } catch (const Error& e) {
      reader.fail(n.line, e.what());
    }
    if (!n.prior) reader.fail(n.line, "no prior for node " + n.name);
    Vector p = n.prior->second;
    if (static_cast<std::size_t>(p.size()) == space.full_cardinality() &&
        space.full_cardinality() != space.cardinality()) {
      Vector kept(static_cast<Eigen::Index>(space.cardinality()));
      for (std::size_t s : space.pruned_states()) {
        if (std::abs(p(static_cast<Eigen::Index>(s))) > 1e-12) {
          reader.fail(n.prior->first, "pruned state " + std::to_string(s) + " of " + n.name +
                                          " has nonzero prior");
        }
      }
      for (std::size_t s = 0; s < space.cardinality(); ++s) {
        kept(static_cast<Eigen::Index>(s)) = p(static_cast<Eigen::Index>(space.original_of(s)));
      }
      p = std::move(kept);
    }
    if (static_cast<std::size_t>(p.size()) != space.cardinality()) {
      reader.fail(n.prior->first, "prior of " + n.name + " needs " +
                                      std::to_string(space.cardinality()) + " values");
    }
    try {
      built.push_back({n.name, std::move(space), Distribution(p)});
    } catch (const Error& e) {
      reader.fail(n.prior->first, std::string("prior of ") + n.name + ": " + e.what());
    }
  }
  std::vector<TreeEdge> built_edges;
  bool any_backward = false;
  bool all_backward = true;
  for (auto& e : edges) {
    TreeEdge edge;
    edge.child = node_index(e.line, e.child);
    edge.parent = node_index(e.line, e.parent);
    const auto nc = static_cast<Eigen::Index>(built[edge.child].space.cardinality());
    const auto np = static_cast<Eigen::Index>(built[edge.parent].space.cardinality());
    if (e.forward.q.rows() == 0) {
      e.forward = QRFactors::zero(nc, np);
    } else if (e.has_backward) {
      any_backward = true;
    } else {
      all_backward = false;
    }
    if (e.forward.rank() > 0 &&
        (e.forward.q.cols() != nc || e.forward.r.cols() != np)) {
      reader.fail(e.line, "factors of " + e.child + "<-" + e.parent + " should be over " +
                              std::to_string(nc) + " and " + std::to_string(np) + " states");
    }
    edge.forward = std::move(e.forward);
    edge.backward = e.has_backward ? std::move(e.backward) : QRFactors{};
    built_edges.push_back(std::move(edge));
  }
  if (any_backward && !all_backward) {
    throw Error(ErrorKind::kParse, reader.source() +
                                       ": either every edge or no edge may carry reverse factors");
  }
  if (any_backward) {
    return TreeNetwork::assemble(std::move(variables), std::move(built), std::move(built_edges));
  }
  return accept_precompiled(std::move(variables), std::move(built), std::move(built_edges));
}

TreeNetwork load_tree(const std::string& path) {
  auto in = open_input(path);
  return parse_tree(in, path);
}

void write_tree(std::ostream& out, const TreeNetwork& tree) {
  out << "sensnet-tree 1\n";
  out << "# node states: mixed radix over members, last member least significant\n";
  for (const auto& var : tree.variables()) {
    out << "variable " << var.label;
    for (const auto& s : var.states) out << ' ' << s;
    out << '\n';
  }
  for (const auto& node : tree.nodes()) {
    out << "node " << node.name;
    for (const auto& m : node.space.members()) out << ' ' << m;
    out << '\n';
    const auto pruned = node.space.pruned_states();
    if (!pruned.empty()) {
      out << "pruned " << node.name;
      for (std::size_t s : pruned) out << ' ' << s;
      out << '\n';
    }
    out << "prior " << node.name << ' ' << node.prior.size() << " :";
    for (std::size_t s = 0; s < node.prior.size(); ++s) out << ' ' << fmt(node.prior[s]);
    out << '\n';
  }
  for (const auto& edge : tree.edges()) {
    out << "edge " << tree.node(edge.child).name << ' ' << tree.node(edge.parent).name
        << " rank " << edge.rank() << '\n';
    if (edge.rank() == 0) continue;
    write_matrix(out, "q", edge.forward.q);
    write_matrix(out, "r", edge.forward.r);
    write_matrix(out, "rq", edge.backward.q);
    write_matrix(out, "rr", edge.backward.r);
  }
}

void write_report(std::ostream& out, const TreeNetwork& tree) {
  std::size_t width = 9;
  std::size_t max_states = 0;
  for (const auto& node : tree.nodes()) {
    width = std::max(width, members_text(node.space).size() + 2);
    max_states = std::max(max_states, node.space.full_cardinality());
  }
  out << "Prior distributions (state index: mixed radix over members, last least significant)\n";
  out << std::left << std::setw(8) << "Node" << std::setw(static_cast<int>(width)) << "Members";
  for (std::size_t s = 0; s < max_states; ++s) out << std::setw(8) << ("X^" + std::to_string(s));
  out << '\n';
  for (const auto& node : tree.nodes()) {
    out << std::setw(8) << node.name << std::setw(static_cast<int>(width)) << members_text(node.space);
    for (std::size_t s = 0; s < node.space.full_cardinality(); ++s) {
      auto c = node.space.compact_index(s);
      out << std::setw(8) << (c ? format_table_value(node.prior[*c]) : std::string("0"));
    }
    out << '\n';
  }
  out << "\nPruned states\n";
  bool any = false;
  for (const auto& node : tree.nodes()) {
    const auto pruned = node.space.pruned_states();
    if (pruned.empty()) continue;
    any = true;
    out << std::setw(8) << node.name;
    for (std::size_t s : pruned) out << ' ' << s;
    out << '\n';
  }
  if (!any) out << "none\n";
  out << "\nSensitivities (S = Q^T R)\n";
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    const auto& edge = tree.edge(e);
    const std::string label =
        "S[" + tree.node(edge.child).name + "," + tree.node(edge.parent).name + "]";
    out << std::setw(16) << label;
    if (edge.rank() == 0) {
      out << "independent\n";
      continue;
    }
    for (std::size_t k = 0; k < edge.rank(); ++k) {
      if (k > 0) out << std::setw(16) << "";
      const auto kk = static_cast<Eigen::Index>(k);
      out << "Q" << (edge.rank() > 1 ? std::to_string(k + 1) : "") << " = "
          << vector_text(edge.forward.q.row(kk)) << "^T  R"
          << (edge.rank() > 1 ? std::to_string(k + 1) : "") << " = "
          << vector_text(edge.forward.r.row(kk)) << '\n';
    }
  }
  out << '\n';
  write_compile_report(out, report_for(tree));
}

void write_compile_report(std::ostream& out, const CompileReport& report) {
  out << std::left << std::setw(16) << "Edge" << std::setw(10) << "dense" << std::setw(6) << "rank"
      << std::setw(10) << "QR" << "compression\n";
  for (const auto& e : report.edges) {
    out << std::setw(16) << e.name
        << std::setw(10) << (std::to_string(e.child_states) + "x" + std::to_string(e.parent_states))
        << std::setw(6) << e.rank << std::setw(10)
        << ("(" + std::to_string(e.child_states) + "+" + std::to_string(e.parent_states) + ")x" +
            std::to_string(e.rank));
    if (e.rank == 0) {
      out << "independent\n";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", e.compression());
      out << buf << '\n';
    }
  }
  out << "pruned states: " << report.pruned_state_count() << '\n';
}

}  // namespace sensnet
