#pragma once

#include <iosfwd>
#include <string>

#include "sensnet/compiler.hpp"
#include "sensnet/network.hpp"
#include "sensnet/tree.hpp"

namespace sensnet {

// Line-oriented text formats. '#' starts a comment. Numbers may be written
// as `v/sqrt2` for v divided by the square root of two. Parse errors throw
// kParse with "<source>:<line>: ..." context.
//
// Network:
//   sensnet-network 1
//   variable <label> <state>...
//   parents <label> <parent>...
//   cpt <label> <rows> <cols>       followed by one line per child state
//
// Plan:
//   sensnet-plan 1
//   cluster <name> <label>...
//   edge <child> <parent>
//
// Tree:
//   sensnet-tree 1
//   variable <label> <state>...
//   node <name> <member>...
//   pruned <name> <original index>...
//   prior <name> <count> : <values>   full or retained count; pruned entries must be 0
//   edge <child> <parent> rank <r>    then q/r blocks (and optional rq/rr for the
//                                     reverse direction), each "<tag> <rows> <cols>"
//                                     followed by <rows> lines
// A tree file that omits every reverse block is treated as hand-entered: its
// factors are projected onto zero-sum rows before assembly.

BeliefNetwork parse_network(std::istream& in, const std::string& source = "<network>");
BeliefNetwork load_network(const std::string& path);
void write_network(std::ostream& out, const BeliefNetwork& net);

ClusterPlan parse_plan(std::istream& in, const std::string& source = "<plan>");
ClusterPlan load_plan(const std::string& path);
void write_plan(std::ostream& out, const ClusterPlan& plan);

TreeNetwork parse_tree(std::istream& in, const std::string& source = "<tree>");
TreeNetwork load_tree(const std::string& path);
void write_tree(std::ostream& out, const TreeNetwork& tree);

// Priors and factors at 4 decimals, pruned states and the size report.
void write_report(std::ostream& out, const TreeNetwork& tree);
void write_compile_report(std::ostream& out, const CompileReport& report);

// Reads `v`, `v/sqrt2`. Throws kParse.
double parse_number(const std::string& token);
// Probability at 4 decimals without the leading zero, as in printed tables.
std::string format_table_value(double v);

// Resolves a path; a missing relative path is retried under $SENSNET_FIXTURES.
std::string resolve_path(const std::string& path);

}  // namespace sensnet
