#include <gtest/gtest.h>

#include <set>

#include "../support.hpp"
#include "sensnet/error.hpp"
#include "sensnet/io.hpp"
#include "sensnet/network.hpp"
#include "sensnet/random_networks.hpp"

using namespace sensnet;
using sensnet::test::fixture;

namespace {

BeliefNetwork two_chain() {
  BeliefNetwork net;
  const NodeId a = net.add_node("x1", {"false", "true"});
  const NodeId b = net.add_node("x2", {"false", "true"});
  net.set_parents(b, {a});
  net.set_cpt(a, (Matrix(2, 1) << 0.4, 0.6).finished());
  net.set_cpt(b, (Matrix(2, 2) << 0.9, 0.2, 0.1, 0.8).finished());
  return net;
}

StateSpace asia_x3() {
  StateSpace s({"x_C", "x_E", "x_G"}, {2, 2, 2});
  s.prune({2, 3});
  return s;
}

template <class F>
ErrorKind kind_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kParse;
}

}  // namespace

TEST(Distribution, RejectsBadInput) {
  EXPECT_EQ(kind_of([] { Distribution((Vector(2) << 0.5, 0.6).finished()); }),
            ErrorKind::kRange);
  EXPECT_EQ(kind_of([] { Distribution((Vector(2) << -0.1, 1.1).finished()); }),
            ErrorKind::kRange);
  const Distribution d((Vector(2) << 0.25, 0.75).finished());
  EXPECT_DOUBLE_EQ(d[1], 0.75);
}

TEST(Distribution, RenormalizesWithinTolerance) {
  const Distribution d((Vector(2) << 0.5, 0.5 + 1e-10).finished());
  EXPECT_NEAR(d.probs().sum(), 1.0, 1e-15);
}

TEST(Evidence, LabelsAppearOnce) {
  Evidence ev;
  ev.set("x_A", 1);
  EXPECT_EQ(kind_of([&] { ev.set("x_A", 0); }), ErrorKind::kValidation);
  ASSERT_NE(ev.find("x_A"), nullptr);
  EXPECT_EQ(*ev.find("x_A"), 1u);
  EXPECT_EQ(ev.find("x_B"), nullptr);
}

TEST(ValidateNetwork, WellFormedChainHasNoViolations) {
  EXPECT_TRUE(validate_network(two_chain()).empty());
}

TEST(ValidateNetwork, ColumnSumReportsNodeAndColumn) {
  BeliefNetwork net = two_chain();
  net.set_cpt(NodeId(1), (Matrix(2, 2) << 0.9, 0.2, 0.0, 0.8).finished());
  const auto v = validate_network(net);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("x2"), std::string::npos);
  EXPECT_NE(v[0].find("column 0"), std::string::npos);
}

TEST(ValidateNetwork, CycleGivesOneAcyclicityViolation) {
  BeliefNetwork net = two_chain();
  net.set_parents(NodeId(0), {NodeId(1)});
  net.set_cpt(NodeId(0), (Matrix(2, 2) << 0.5, 0.5, 0.5, 0.5).finished());
  const auto v = validate_network(net);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("cycle"), std::string::npos);
  EXPECT_FALSE(net.is_acyclic());
}

TEST(ValidateNetwork, DimensionMismatch) {
  BeliefNetwork net = two_chain();
  net.set_cpt(NodeId(1), (Matrix(2, 1) << 0.5, 0.5).finished());
  EXPECT_FALSE(validate_network(net).empty());
}

TEST(ValidateNetwork, AsiaFixtureIsValid) {
  EXPECT_TRUE(validate_network(load_network(fixture("asia.net"))).empty());
}

TEST(StateIndex, FollowsPowersOfTwoFromTheRight) {
  const StateSpace full({"x_C", "x_E", "x_G"}, {2, 2, 2});
  EXPECT_EQ(state_index({{"x_C", 0}, {"x_E", 0}, {"x_G", 0}}, full), 0u);
  EXPECT_EQ(state_index({{"x_C", 1}, {"x_E", 1}, {"x_G", 1}}, full), 7u);
  EXPECT_EQ(state_index({{"x_C", 0}, {"x_E", 0}, {"x_G", 1}}, full), 1u);
  EXPECT_EQ(state_index({{"x_C", 1}, {"x_E", 0}, {"x_G", 0}}, full), 4u);
}

TEST(StateIndex, PrunedStateIsAnError) {
  const StateSpace s = asia_x3();
  EXPECT_EQ(kind_of([&] { state_index({{"x_C", 0}, {"x_E", 1}, {"x_G", 0}}, s); }),
            ErrorKind::kPrunedState);
  // Compaction keeps relative order: original 4 becomes 2.
  EXPECT_EQ(state_index({{"x_C", 1}, {"x_E", 0}, {"x_G", 0}}, s), 2u);
  EXPECT_EQ(state_index({{"x_C", 1}, {"x_E", 1}, {"x_G", 1}}, s), 5u);
}

TEST(StateIndex, IncompleteOrForeignAssignment) {
  const StateSpace s = asia_x3();
  EXPECT_THROW(state_index({{"x_C", 0}}, s), Error);
  EXPECT_THROW(state_index({{"x_C", 0}, {"x_E", 0}, {"x_G", 0}, {"x_Z", 0}}, s), Error);
}

TEST(StateIndex, BijectionOverRetainedStates) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> card(1, 4);
    std::vector<std::string> members{"a", "b", "c"};
    std::vector<std::size_t> radix{card(rng), card(rng), card(rng)};
    StateSpace s(members, radix);
    std::vector<std::size_t> drop;
    for (std::size_t i = 0; i + 1 < s.full_cardinality(); i += 3) drop.push_back(i);
    s.prune(drop);
    std::set<std::size_t> seen;
    for (std::size_t x = 0; x < s.full_cardinality(); ++x) {
      Assignment a;
      for (std::size_t m = 0; m < 3; ++m) a[members[m]] = s.member_value(x, m);
      if (s.compact_index(x)) {
        const std::size_t c = state_index(a, s);
        EXPECT_LT(c, s.cardinality());
        EXPECT_EQ(s.original_of(c), x);
        seen.insert(c);
      } else {
        EXPECT_THROW(state_index(a, s), Error);
      }
    }
    EXPECT_EQ(seen.size(), s.cardinality());
  }
}

TEST(RestrictDistribution, UniformPair) {
  const StateSpace s({"b", "a"}, {2, 2});
  const Distribution d = restrict_distribution(Distribution::uniform(4), s, {{"a", 1}});
  EXPECT_DOUBLE_EQ(d[0], 0.0);
  EXPECT_DOUBLE_EQ(d[1], 0.5);
  EXPECT_DOUBLE_EQ(d[2], 0.0);
  EXPECT_DOUBLE_EQ(d[3], 0.5);
}

TEST(RestrictDistribution, FullAssignmentGivesIndicator) {
  const StateSpace s({"b", "a"}, {2, 2});
  const Distribution d = restrict_distribution(Distribution::uniform(4), s, {{"a", 0}, {"b", 1}});
  EXPECT_EQ((d.probs() - Distribution::indicator(4, 2).probs()).norm(), 0.0);
}

TEST(RestrictDistribution, AsiaX3GivenG) {
  const StateSpace s = asia_x3();
  const Distribution prior((Vector(6) << .5210, .4141, .0055, .0044, .0235, .0315).finished());
  const Distribution d = restrict_distribution(prior, s, {{"x_G", 1}});
  const double mass = .4141 + .0044 + .0315;
  EXPECT_NEAR(d[1], .4141 / mass, 1e-12);
  EXPECT_NEAR(d[3], .0044 / mass, 1e-12);
  EXPECT_NEAR(d[5], .0315 / mass, 1e-12);
  EXPECT_EQ(d[0] + d[2] + d[4], 0.0);
}

TEST(RestrictDistribution, IdempotentAndZeroMass) {
  const StateSpace s({"b", "a"}, {2, 2});
  const Distribution d((Vector(4) << .1, .2, .3, .4).finished());
  const Distribution once = restrict_distribution(d, s, {{"a", 1}});
  const Distribution twice = restrict_distribution(once, s, {{"a", 1}});
  EXPECT_LT((once.probs() - twice.probs()).cwiseAbs().maxCoeff(), 1e-15);
  const Distribution z((Vector(4) << .5, 0, .5, 0).finished());
  EXPECT_EQ(kind_of([&] { restrict_distribution(z, s, {{"a", 1}}); }),
            ErrorKind::kZeroProbability);
}

TEST(BeliefNetwork, TopologicalOrderPutsParentsFirst) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const BeliefNetwork net = random_dag(rng, 9, 3, 3);
    const auto order = net.topological_order();
    std::vector<std::size_t> pos(net.size());
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k].index()] = k;
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (NodeId p : net.parents(NodeId(i))) EXPECT_LT(pos[p.index()], pos[i]);
    }
    EXPECT_TRUE(validate_network(net).empty());
  }
}
