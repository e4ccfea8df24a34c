#include <gtest/gtest.h>

#include <cmath>

#include "../support.hpp"
#include "sensnet/compiler.hpp"
#include "sensnet/error.hpp"
#include "sensnet/io.hpp"
#include "sensnet/oracle.hpp"
#include "sensnet/random_networks.hpp"

using namespace sensnet;
using sensnet::test::fixture;
using sensnet::test::max_abs_diff;

namespace {

BeliefNetwork asia() { return load_network(fixture("asia.net")); }

std::size_t id(const BeliefNetwork& net, const char* label) { return net.require(label).index(); }

BeliefNetwork v_structure() {
  BeliefNetwork net;
  const NodeId a = net.add_node("x1", {"0", "1"});
  const NodeId b = net.add_node("x2", {"0", "1"});
  const NodeId c = net.add_node("x3", {"0", "1"});
  net.set_parents(c, {a, b});
  net.set_cpt(c, (Matrix(2, 4) << .9, .5, .4, .1, .1, .5, .6, .9).finished());
  return net;
}

}  // namespace

TEST(Moralize, ChainAddsNothing) {
  const BeliefNetwork net = load_network(fixture("chain3.net"));
  const UndirectedGraph g = moralize(net);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(Moralize, VStructureBecomesTriangle) {
  const UndirectedGraph g = moralize(v_structure());
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.has_edge(0, 1));
}

TEST(Moralize, AsiaMarriages) {
  const BeliefNetwork net = asia();
  const UndirectedGraph g = moralize(net);
  EXPECT_TRUE(g.has_edge(id(net, "x_E"), id(net, "x_B")));
  EXPECT_TRUE(g.has_edge(id(net, "x_C"), id(net, "x_G")));
  // 8 DAG edges plus two marriages.
  EXPECT_EQ(g.edge_count(), 10u);
}

TEST(PlanClusters, TreeDagKeepsItsShape) {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const BeliefNetwork net = random_tree_network(rng, 9);
    const ClusterPlan plan = plan_clusters(moralize(net), net);
    ASSERT_EQ(plan.clusters.size(), net.size());
    ASSERT_EQ(plan.tree_edges.size(), net.size() - 1);
    for (const auto& [c, p] : plan.tree_edges) {
      ASSERT_EQ(plan.clusters[c].size(), 1u);
      const NodeId child = net.require(plan.clusters[c][0]);
      const NodeId parent = net.require(plan.clusters[p][0]);
      const auto& pa = net.parents(child);
      const auto& pp = net.parents(parent);
      EXPECT_TRUE((!pa.empty() && pa[0] == parent) || (!pp.empty() && pp[0] == child));
    }
    EXPECT_TRUE(check_plan(plan, net).empty());
  }
}

TEST(PlanClusters, AsiaPlanIsValid) {
  const BeliefNetwork net = asia();
  const ClusterPlan plan = plan_clusters(moralize(net), net);
  EXPECT_TRUE(check_plan(plan, net).empty());
  EXPECT_TRUE(covers_families(plan, net));
}

TEST(PlanClusters, AsiaFixturePlanHasTheSixNodeLayout) {
  const BeliefNetwork net = asia();
  const ClusterPlan plan = load_plan(fixture("asia.plan"));
  EXPECT_TRUE(check_plan(plan, net).empty());
  ASSERT_EQ(plan.clusters.size(), 6u);
  EXPECT_EQ(plan.clusters[2], (std::vector<std::string>{"x_C", "x_E", "x_G"}));
  EXPECT_EQ(plan.tree_edges.size(), 5u);
}

TEST(PlanClusters, RandomDagsSatisfyInvariants) {
  Rng rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const BeliefNetwork net = random_dag(rng, 10, 3, 2);
    const ClusterPlan plan = plan_clusters(moralize(net), net);
    const auto violations = check_plan(plan, net);
    EXPECT_TRUE(violations.empty()) << violations.front();
    bool tree_shaped = true;
    for (std::size_t i = 0; i < net.size(); ++i) tree_shaped &= net.parents(NodeId(i)).size() <= 1;
    if (!tree_shaped) {
      EXPECT_TRUE(covers_families(plan, net));
    }
  }
}

TEST(CheckPlan, DetectsBrokenPlans) {
  const BeliefNetwork net = asia();
  ClusterPlan missing = load_plan(fixture("asia.plan"));
  missing.clusters[2] = {"x_C", "x_G"};
  EXPECT_FALSE(check_plan(missing, net).empty());

  ClusterPlan cycle = load_plan(fixture("asia.plan"));
  cycle.tree_edges.push_back({0, 5});
  EXPECT_FALSE(check_plan(cycle, net).empty());

  // x_F beside x_D instead of X_3 breaks the separation property.
  ClusterPlan moved = load_plan(fixture("asia.plan"));
  moved.tree_edges[3] = {4, 3};
  EXPECT_FALSE(check_plan(moved, net).empty());
}

TEST(DSeparated, Basics) {
  const BeliefNetwork net = load_network(fixture("chain3.net"));
  EXPECT_TRUE(d_separated(net, {0}, {2}, {1}));
  EXPECT_FALSE(d_separated(net, {0}, {2}, {}));
  const BeliefNetwork v = v_structure();
  EXPECT_TRUE(d_separated(v, {0}, {1}, {}));
  EXPECT_FALSE(d_separated(v, {0}, {1}, {2}));
}

TEST(Compile, AsiaPriorsAndPruning) {
  const auto [tree, rep] = compile(asia(), load_plan(fixture("asia.plan")));
  const CompoundNode& x3 = tree.node(tree.require_node("X_3"));
  EXPECT_EQ(x3.space.full_cardinality(), 8u);
  EXPECT_EQ(x3.space.cardinality(), 6u);
  EXPECT_EQ(x3.space.pruned_states(), (std::vector<std::size_t>{2, 3}));
  const std::vector<double> table{.5210, .4141, .0055, .0044, .0235, .0315};
  for (std::size_t s = 0; s < 6; ++s) EXPECT_NEAR(x3.prior[s], table[s], 5e-5);
  EXPECT_NEAR(tree.variable_prior("x_H")[1], .4360, 5e-5);
  EXPECT_EQ(rep.pruned_state_count(), 2u);
}

TEST(Compile, AsiaEdgeReport) {
  const auto [tree, rep] = compile(asia(), load_plan(fixture("asia.plan")));
  const EdgeReport* s43 = nullptr;
  for (const auto& e : rep.edges) {
    if (e.name == "X_4<-X_3") s43 = &e;
  }
  ASSERT_NE(s43, nullptr);
  EXPECT_EQ(s43->rank, 1u);
  EXPECT_EQ(s43->child_states, 2u);
  EXPECT_EQ(s43->parent_states, 6u);
  EXPECT_EQ(s43->dense_size(), 12u);
  EXPECT_EQ(s43->qr_size(), 8u);
  EXPECT_DOUBLE_EQ(s43->compression(), 12.0 / 8.0);
  for (const auto& e : rep.edges) EXPECT_EQ(e.rank, 1u);
}

TEST(Compile, SingleNode) {
  BeliefNetwork net;
  const NodeId a = net.add_node("a", {"0", "1", "2"});
  net.set_cpt(a, (Matrix(3, 1) << .2, .3, .5).finished());
  const auto [tree, rep] = compile(net, plan_clusters(moralize(net), net));
  ASSERT_EQ(tree.size(), 1u);
  EXPECT_TRUE(tree.edges().empty());
  EXPECT_NEAR(tree.node(0).prior[2], .5, 1e-15);
}

TEST(Compile, InvalidNetworkOrPlan) {
  BeliefNetwork net = asia();
  net.set_cpt(net.require("x_D"), (Matrix(2, 2) << .9, .9, .2, .2).finished());
  EXPECT_THROW(compile(net, load_plan(fixture("asia.plan"))), Error);
  ClusterPlan bad = load_plan(fixture("asia.plan"));
  bad.tree_edges.pop_back();
  EXPECT_THROW(compile(asia(), bad), Error);
}

TEST(Compile, EdgesReproduceOraclePairwiseConditionals) {
  Rng rng(79);
  for (int trial = 0; trial < 30; ++trial) {
    const BeliefNetwork net = random_dag(rng, 7, 2, 3);
    const auto [tree, rep] = compile(net, plan_clusters(moralize(net), net));
    const JointTable table = joint(net);
    for (const auto& n : tree.nodes()) {
      const Vector full = space_marginal(table, net, n.space);
      for (std::size_t s = 0; s < n.space.full_cardinality(); ++s) {
        if (n.space.compact_index(s)) EXPECT_GT(full(static_cast<Eigen::Index>(s)), 1e-12);
        else EXPECT_LE(full(static_cast<Eigen::Index>(s)), 1e-12);
      }
    }
    for (const auto& e : tree.edges()) {
      const ConditionalMatrix exact = pairwise_conditional(table, net, tree.node(e.child).space,
                                                           tree.node(e.parent).space);
      const ConditionalMatrix rebuilt =
          sensitivity_to_cpt(e.forward, tree.node(e.child).prior, tree.node(e.parent).prior);
      EXPECT_LT(max_abs_diff(rebuilt.entries(), exact.entries()), 1e-9);
    }
    for (std::size_t k = 0; k < rep.edges.size(); ++k) {
      const auto& er = rep.edges[k];
      EXPECT_EQ(er.qr_size(), (er.child_states + er.parent_states) * er.rank);
    }
  }
}

TEST(CompileTreeShaped, MatchesEnumeratingCompiler) {
  Rng rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    const BeliefNetwork net = random_tree_network(rng, 8);
    const TreeNetwork fast = compile_tree_shaped(net);
    const TreeNetwork slow = compile(net, plan_clusters(moralize(net), net)).first;
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      EXPECT_LT((fast.node(i).prior.probs() - slow.node(i).prior.probs()).cwiseAbs().maxCoeff(), 1e-12);
    }
    for (std::size_t e = 0; e < fast.edges().size(); ++e) {
      EXPECT_LT(max_abs_diff(fast.edge(e).forward.dense(), slow.edge(e).forward.dense()), 1e-12);
    }
  }
  EXPECT_THROW(compile_tree_shaped(asia()), Error);
}

TEST(AcceptPrecompiled, FourDigitEntriesGiveTheAsiaTree) {
  const TreeNetwork t = load_tree(fixture("asia_tables.tree"));
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.edges().size(), 5u);
  EXPECT_EQ(t.node(t.require_node("X_3")).space.cardinality(), 6u);
}

TEST(AcceptPrecompiled, MismatchedWidthIsDimensionError) {
  const TreeNetwork t = load_tree(fixture("asia_tables.tree"));
  std::vector<TreeEdge> edges = t.edges();
  edges[1].forward.q = Matrix::Zero(1, 5);
  for (auto& e : edges) e.backward = {};
  try {
    accept_precompiled(t.variables(), t.nodes(), edges);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
    EXPECT_NE(std::string(e.what()).find("X_3<-X_2"), std::string::npos);
  }
}

TEST(AcceptPrecompiled, InconsistentReverseFactorsNameTheEdge) {
  const auto [tree, rep] = compile(asia(), load_plan(fixture("asia.plan")));
  std::vector<TreeEdge> edges = tree.edges();
  edges[3].backward.r(0, 1) += 1e-5;
  edges[3].backward.r(0, 0) -= 1e-5;
  try {
    accept_precompiled(tree.variables(), tree.nodes(), edges);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_NE(std::string(e.what()).find(edge_name(tree, 3)), std::string::npos);
  }
  EXPECT_NO_THROW(accept_precompiled(tree.variables(), tree.nodes(), tree.edges()));
}
