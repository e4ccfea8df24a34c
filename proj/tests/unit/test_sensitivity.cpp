#include <gtest/gtest.h>

#include <cmath>

#include "../support.hpp"
#include "sensnet/error.hpp"
#include "sensnet/io.hpp"
#include "sensnet/oracle.hpp"
#include "sensnet/random_networks.hpp"
#include "sensnet/sensitivity.hpp"

using namespace sensnet;
using sensnet::test::fixture;
using sensnet::test::max_abs;
using sensnet::test::max_abs_diff;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Matrix identity2() { return Matrix::Identity(2, 2); }

double sums(const Matrix& s) {
  if (s.size() == 0) return 0.0;
  return std::max(s.rowwise().sum().cwiseAbs().maxCoeff(), s.colwise().sum().cwiseAbs().maxCoeff());
}

Distribution dist(std::initializer_list<double> v) {
  Vector p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return Distribution(p);
}

}  // namespace

TEST(CptToSensitivity, BinaryIdentity) {
  const Matrix s = cpt_to_sensitivity(ConditionalMatrix(identity2()));
  const Matrix expect = (Matrix(2, 2) << .5, -.5, -.5, .5).finished();
  EXPECT_LT(max_abs_diff(s, expect), 1e-15);
}

TEST(CptToSensitivity, EqualColumnsGiveZero) {
  Matrix p(3, 4);
  for (int c = 0; c < 4; ++c) p.col(c) << .2, .3, .5;
  EXPECT_LT(max_abs(cpt_to_sensitivity(ConditionalMatrix(p))), 1e-15);
}

TEST(CptToSensitivity, AsiaBGivenAMatchesFixtureRow) {
  const Matrix p = (Matrix(2, 2) << .99, .95, .01, .05).finished();
  const QRFactors f = qr_factor(cpt_to_sensitivity(ConditionalMatrix(p)));
  ASSERT_EQ(f.rank(), 1u);
  QRFactors table;
  table.q = (Matrix(1, 2) << -1 / kSqrt2, 1 / kSqrt2).finished();
  table.r = (Matrix(1, 2) << -.04 / kSqrt2, .04 / kSqrt2).finished();
  EXPECT_LT(max_abs_diff(f.dense(), table.dense()), 1e-12);
}

TEST(QrFactor, ZeroMatrixHasRankZero) {
  const QRFactors f = qr_factor(Matrix::Zero(4, 4));
  EXPECT_EQ(f.rank(), 0u);
  EXPECT_EQ(f.q.cols(), 4);
  EXPECT_EQ(f.r.cols(), 4);
  EXPECT_EQ(max_abs(f.dense()), 0.0);
}

TEST(QrFactor, OrthonormalQAndReconstruction) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix p = random_cpt(rng, 6, 5);
    const Matrix s = cpt_to_sensitivity(ConditionalMatrix(p));
    const QRFactors f = qr_factor(s);
    EXPECT_LT(max_abs_diff(f.dense(), s), 1e-12);
    const Matrix g = f.q * f.q.transpose();
    EXPECT_LT(max_abs_diff(g, Matrix::Identity(g.rows(), g.cols())), 1e-12);
    EXPECT_EQ(f.rank(), numerical_rank(s));
  }
}

TEST(QrFactor, AsiaS63IsRankOneAndMatchesFixtureUpToGauge) {
  const auto [tree, rep] = compile(load_network(fixture("asia.net")), load_plan(fixture("asia.plan")));
  const TreeNetwork tables = load_tree(fixture("asia_tables.tree"));
  const auto e = tree.edge_between(tree.require_node("X_6"), tree.require_node("X_3"));
  const auto t = tables.edge_between(tables.require_node("X_6"), tables.require_node("X_3"));
  ASSERT_TRUE(e && t);
  EXPECT_EQ(tree.edge(*e).rank(), 1u);
  EXPECT_LT(max_abs_diff(tree.edge(*e).forward.dense(), tables.edge(*t).forward.dense()), 1e-4);
}

TEST(QrFactor, ThreeDistinctColumnsGiveRankTwo) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = random_cpt(rng, 8, 8, 3);
    ASSERT_EQ(numerical_rank(p), 3u);
    EXPECT_EQ(qr_factor(cpt_to_sensitivity(ConditionalMatrix(p))).rank(), 2u);
  }
}

TEST(RankLaw, SimpleCases) {
  EXPECT_TRUE(sensitivity_rank_law_check(ConditionalMatrix(identity2())));
  Matrix eq(2, 3);
  eq << .3, .3, .3, .7, .7, .7;
  EXPECT_TRUE(sensitivity_rank_law_check(ConditionalMatrix(eq)));
}

TEST(RankLaw, RandomTables) {
  Rng rng(13);
  std::uniform_int_distribution<Eigen::Index> dim(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index rows = dim(rng), cols = dim(rng);
    const Eigen::Index distinct = std::uniform_int_distribution<Eigen::Index>(1, cols)(rng);
    EXPECT_TRUE(sensitivity_rank_law_check(ConditionalMatrix(random_cpt(rng, rows, cols, distinct))));
  }
}

TEST(Reduce, AsiaScalarContractions) {
  const TreeNetwork t = load_tree(fixture("asia_tables.tree"));
  auto edge = [&](const char* c, const char* p) {
    return t.edge(*t.edge_between(t.require_node(c), t.require_node(p))).forward;
  };
  const QRFactors s63 = edge("X_6", "X_3");
  const QRFactors s32 = edge("X_3", "X_2");
  const QRFactors s21 = edge("X_2", "X_1");
  EXPECT_NEAR((s63.r * s32.q.transpose())(0, 0), .5319, 1e-4);
  EXPECT_NEAR((s32.r * s21.q.transpose())(0, 0), .6726, 1e-4);
  const QRFactors s61 = reduce(reduce(s63, s32), s21);
  EXPECT_NEAR(binary_value(s61.dense()).value, .01431, 1e-5);
}

TEST(Reduce, RankZeroAnnihilates) {
  Rng rng(2);
  const QRFactors a = qr_factor(cpt_to_sensitivity(ConditionalMatrix(random_cpt(rng, 3, 4))));
  const QRFactors z = QRFactors::zero(4, 5);
  const QRFactors r = reduce(a, z);
  EXPECT_EQ(r.rank(), 0u);
  EXPECT_EQ(r.dense().rows(), 3);
  EXPECT_EQ(r.dense().cols(), 5);
  EXPECT_THROW(reduce(a, QRFactors::zero(3, 5)), Error);
}

TEST(Reduce, MatchesMarginalizedChain) {
  Rng rng(21);
  std::uniform_int_distribution<std::size_t> card(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    BeliefNetwork net;
    std::vector<NodeId> ids;
    for (int k = 0; k < 3; ++k) {
      std::vector<std::string> states(card(rng));
      for (std::size_t s = 0; s < states.size(); ++s) states[s] = "s" + std::to_string(s);
      ids.push_back(net.add_node("x" + std::to_string(k + 1), states));
    }
    net.set_parents(ids[1], {ids[0]});
    net.set_parents(ids[2], {ids[1]});
    const auto n = [&](int k) { return static_cast<Eigen::Index>(net.variable(ids[k]).cardinality()); };
    net.set_cpt(ids[0], random_distribution(rng, n(0), 0.05));
    net.set_cpt(ids[1], random_cpt(rng, n(1), n(0)));
    net.set_cpt(ids[2], random_cpt(rng, n(2), n(1)));
    const QRFactors s32 = qr_factor(cpt_to_sensitivity(ConditionalMatrix(net.cpt(ids[2]))));
    const QRFactors s21 = qr_factor(cpt_to_sensitivity(ConditionalMatrix(net.cpt(ids[1]))));
    const QRFactors s31 = reduce(s32, s21);
    const StateSpace c({"x3"}, {static_cast<std::size_t>(n(2))});
    const StateSpace p({"x1"}, {static_cast<std::size_t>(n(0))});
    const Matrix exact = cpt_to_sensitivity(pairwise_conditional(net, c, p));
    EXPECT_LT(max_abs_diff(s31.dense(), exact), 1e-9);
    EXPECT_LE(s31.rank(), std::min(s32.rank(), s21.rank()));
  }
}

TEST(Reverse, InvolutionAndRank) {
  Rng rng(31);
  std::uniform_int_distribution<Eigen::Index> dim(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index rows = dim(rng), cols = dim(rng);
    const Matrix p = random_cpt(rng, rows, cols);
    const Distribution pj(random_distribution(rng, cols, 0.05));
    const Distribution pi(p * pj.probs());
    const QRFactors s = qr_factor(cpt_to_sensitivity(ConditionalMatrix(p)));
    const QRFactors back = reverse(s, pi, pj);
    EXPECT_EQ(numerical_rank(back.dense()), s.rank());
    EXPECT_LT(sums(back.dense()), 1e-12);
    EXPECT_LT(max_abs_diff(reverse(back, pj, pi).dense(), s.dense()), 1e-9);
    EXPECT_LT(max_abs_diff(back.dense(), reverse_dense(s.dense(), pi, pj)), 1e-12);
  }
}

TEST(Reverse, MatchesBayesInversion) {
  Rng rng(37);
  std::uniform_int_distribution<Eigen::Index> dim(2, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index rows = dim(rng), cols = dim(rng);
    const ConditionalMatrix p(random_cpt(rng, rows, cols));
    const Distribution pj(random_distribution(rng, cols, 0.05));
    const Distribution pi(p.entries() * pj.probs());
    const QRFactors s = qr_factor(cpt_to_sensitivity(p));
    const ConditionalMatrix via_sens = sensitivity_to_cpt(reverse(s, pi, pj), pj, pi);
    const auto [bayes, marginal] = arc_reverse_cpt(sensitivity_to_cpt(s, pi, pj), pj);
    EXPECT_LT(max_abs_diff(via_sens.entries(), bayes.entries()), 1e-9);
    EXPECT_LT((marginal.probs() - pi.probs()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reverse, ZeroWeightIsSingular) {
  const QRFactors s = qr_factor(cpt_to_sensitivity(ConditionalMatrix(identity2())));
  try {
    reverse(s, dist({1.0, 0.0}), dist({.5, .5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingularWeight);
  }
}

TEST(Reverse, AsiaReversedFactor) {
  const Matrix q43 = (Matrix(1, 2) << -1 / kSqrt2, 1 / kSqrt2).finished();
  const Matrix r34 = reverse_r(q43, (Vector(2) << .8549, .1451).finished());
  EXPECT_NEAR(r34(0, 0) * kSqrt2, -4.031, 5e-3);
  EXPECT_NEAR(r34(0, 1) * kSqrt2, 4.031, 5e-3);
}

TEST(SensitivityToCpt, RankZeroColumnsArePrior) {
  const Distribution pi = dist({.2, .3, .5});
  const Distribution pj = dist({.6, .4});
  const ConditionalMatrix p = sensitivity_to_cpt(QRFactors::zero(3, 2), pi, pj);
  for (int c = 0; c < 2; ++c) EXPECT_LT((p.entries().col(c) - pi.probs()).norm(), 1e-15);
}

TEST(SensitivityToCpt, RoundTripAndMarginal) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const ConditionalMatrix p(random_cpt(rng, 5, 4));
    const Distribution pj(random_distribution(rng, 4, 0.01));
    const Distribution pi(p.entries() * pj.probs());
    const ConditionalMatrix back = sensitivity_to_cpt(qr_factor(cpt_to_sensitivity(p)), pi, pj);
    EXPECT_LT(max_abs_diff(back.entries(), p.entries()), 1e-9);
    EXPECT_LT((back.entries() * pj.probs() - pi.probs()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SensitivityToCpt, AsiaTableRow) {
  const TreeNetwork t = load_tree(fixture("asia_tables.tree"));
  const TreeEdge& e = t.edge(*t.edge_between(t.require_node("X_2"), t.require_node("X_1")));
  const ConditionalMatrix p = sensitivity_to_cpt(e.forward, t.node(e.child).prior, t.node(e.parent).prior);
  EXPECT_NEAR(p.entries()(1, 1) - p.entries()(1, 0), .0400, 1e-12);
  EXPECT_NEAR(p.entries().row(1).dot(t.node(e.parent).prior.probs()), .0104, 1e-12);
}

TEST(SensitivityToCpt, InconsistentTripleIsRangeError) {
  const Matrix s = (Matrix(2, 2) << .5, -.5, -.5, .5).finished();
  try {
    sensitivity_to_cpt(s, dist({.9, .1}), dist({.5, .5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRange);
  }
}

TEST(ApplyUpdate, ZeroChangeAndZeroSum) {
  Rng rng(43);
  const QRFactors s = qr_factor(cpt_to_sensitivity(ConditionalMatrix(random_cpt(rng, 4, 3))));
  EXPECT_EQ(apply_update(s, Vector::Zero(3)).cwiseAbs().maxCoeff(), 0.0);
  const Vector d = (Vector(3) << .1, -.3, .2).finished();
  EXPECT_LT(std::abs(apply_update(s, d).sum()), 1e-15);
  EXPECT_THROW(apply_update(s, (Vector(3) << .1, .1, .1).finished()), Error);
}

TEST(ApplyUpdate, ComposedWithPriorGivesValidDistribution) {
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const ConditionalMatrix p(random_cpt(rng, 4, 3));
    const Distribution pj(random_distribution(rng, 3, 0.01));
    const Distribution pi(p.entries() * pj.probs());
    const Distribution post(random_distribution(rng, 3));
    const Vector next = pi.probs() + apply_update(qr_factor(cpt_to_sensitivity(p)), post.probs() - pj.probs());
    EXPECT_NO_THROW(Distribution{next});
    EXPECT_LT((next - p.entries() * post.probs()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Binary, SensitivityValues) {
  const BinarySensitivity id = binary_sensitivity(ConditionalMatrix(identity2()));
  EXPECT_DOUBLE_EQ(id.value, 1.0);
  EXPECT_TRUE(id.deterministic());
  Matrix eq(2, 2);
  eq << .3, .3, .7, .7;
  EXPECT_DOUBLE_EQ(binary_sensitivity(ConditionalMatrix(eq)).value, 0.0);
  const Matrix ba = (Matrix(2, 2) << .99, .95, .01, .05).finished();
  const BinarySensitivity s = binary_sensitivity(ConditionalMatrix(ba));
  EXPECT_NEAR(s.value, .04, 1e-15);
  EXPECT_NEAR(s.value, ba(0, 0) - ba(0, 1), 1e-15);
  EXPECT_FALSE(s.deterministic());
}

TEST(Binary, ReduceIsOneMultiplication) {
  binary_op_count() = {};
  EXPECT_DOUBLE_EQ(binary_reduce({0.0}, {0.7}).value, 0.0);
  EXPECT_EQ(binary_op_count().multiplications, 1u);
  EXPECT_DOUBLE_EQ(binary_reduce({1.0}, {0.3}).value, 0.3);
  EXPECT_EQ(binary_op_count().multiplications, 2u);
  EXPECT_EQ(binary_op_count().divisions, 0u);
}

TEST(Binary, ReverseCountsAndValues) {
  binary_op_count() = {};
  EXPECT_DOUBLE_EQ(binary_reverse({0.3}, dist({.5, .5}), dist({.5, .5})).value, 0.3);
  EXPECT_EQ(binary_op_count().multiplications, 3u);
  EXPECT_EQ(binary_op_count().divisions, 1u);
  const double s = binary_reverse({.01431}, dist({.5640, .4360}), dist({.99, .01})).value;
  EXPECT_NEAR(s, 5.8e-4, 1e-5);
  try {
    binary_reverse({0.3}, dist({1.0, 0.0}), dist({.5, .5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingularWeight);
  }
}

TEST(Binary, Update) {
  EXPECT_DOUBLE_EQ(binary_update(.3, {.4}, 0.0), .3);
  // Instantiating j to true moves p(j) by p(not j).
  const double pj_true = .1451;
  EXPECT_NEAR(binary_update(.4502, {.27}, 1.0 - pj_true), .68, .005);
  EXPECT_THROW(binary_update(.9, {.5}, .5), Error);
}

TEST(Binary, FastPathsMatchGeneralPaths) {
  Rng rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    const ConditionalMatrix a(random_cpt(rng, 2, 2));
    const ConditionalMatrix b(random_cpt(rng, 2, 2));
    const Matrix da = cpt_to_sensitivity(a);
    const Matrix db = cpt_to_sensitivity(b);
    const BinarySensitivity va = binary_sensitivity(a);
    const BinarySensitivity vb = binary_sensitivity(b);
    EXPECT_LT(max_abs_diff(binary_dense(va), da), 1e-12);
    EXPECT_LT(std::abs(binary_value(da).value - va.value), 1e-12);
    EXPECT_LT(max_abs_diff(binary_dense(binary_reduce(va, vb)), da * db), 1e-12);
    EXPECT_LT(max_abs_diff(binary_dense(binary_reduce(va, vb)), reduce(qr_factor(da), qr_factor(db)).dense()),
              1e-12);
    const Distribution pj(random_distribution(rng, 2, 0.05));
    const Distribution pi(a.entries() * pj.probs());
    EXPECT_LT(max_abs_diff(binary_dense(binary_reverse(va, pi, pj)), reverse_dense(da, pi, pj)), 1e-12);
  }
}
