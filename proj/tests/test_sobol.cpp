#include "treesobol/sobol.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "treesobol/oracle.hpp"
#include "treesobol/rng.hpp"

using namespace treesobol;
using testutil::interaction_ensemble_2d;
using testutil::random_ensemble;
using testutil::split_leaf;
using testutil::two_tree_ensemble_2d;

namespace {

ProductMeasure uniform_for(const Ensemble& ens) {
  return ProductMeasure::uniform(ens.domain);
}

Ensemble constant_ensemble(int p, double value) {
  Ensemble ens;
  ens.domain = Domain::unit_cube(p);
  ens.trees = {Tree::stump(value)};
  return ens;
}

}  // namespace

TEST(CondExpectCoeffs, PrunesTreesIgnoringTheSet) {
  const Ensemble ens = two_tree_ensemble_2d();
  const ProductMeasure m = uniform_for(ens);
  const auto terms = cond_expect_coeffs(ens, m, {0});
  // only the first tree splits on dim 0; its full-margin dim-1 factor is 1
  ASSERT_EQ(terms.size(), 2u);
  EXPECT_DOUBLE_EQ(terms[0].coeff, 1.0);
  EXPECT_EQ(terms[0].box[0], (Interval{0.0, 0.5, false}));
  EXPECT_DOUBLE_EQ(terms[1].coeff, 100.0);
  EXPECT_EQ(terms[1].box[0], (Interval{0.5, 1.0, true}));
}

TEST(CondExpectCoeffs, StumpPrunesToNothing) {
  const Ensemble ens = constant_ensemble(3, 5.0);
  const ProductMeasure m = uniform_for(ens);
  EXPECT_TRUE(cond_expect_coeffs(ens, m, {0}).empty());
  EXPECT_TRUE(cond_expect_coeffs(ens, m, {0, 1, 2}).empty());
}

TEST(CondExpectCoeffs, FullSetGivesRawLeafValues) {
  Ensemble ens;
  ens.domain = Domain::unit_cube(2);
  ens.trees = {testutil::example_tree_2d()};
  const ProductMeasure m = uniform_for(ens);
  const auto terms = cond_expect_coeffs(ens, m, {0, 1});
  ASSERT_EQ(terms.size(), 4u);
  EXPECT_EQ(terms[0].coeff, 1.0);
  EXPECT_EQ(terms[1].coeff, 2.0);
  EXPECT_EQ(terms[2].coeff, 3.0);
  EXPECT_EQ(terms[3].coeff, 4.0);
}

TEST(VarCondExpect, TwoTreeEnsembleHandValues) {
  const Ensemble ens = two_tree_ensemble_2d();
  const ProductMeasure m = uniform_for(ens);
  // two levels {1, 100} with mass 1/2 each
  EXPECT_NEAR(var_cond_expect(ens, m, {0}), 2450.25, 1e-12 * 2450.25);
  // three levels {-2, 0, 2} with mass 1/3 each
  EXPECT_NEAR(var_cond_expect(ens, m, {1}), 8.0 / 3.0, 1e-12 * 8.0);
}

TEST(VarCondExpect, UnsplitSetIsZero) {
  Ensemble ens;
  ens.domain = Domain::unit_cube(3);
  Tree tree = Tree::stump(0.0);
  split_leaf(tree, 0, 0, 0.4, -1.0, 2.0);
  ens.trees = {tree};
  const ProductMeasure m = uniform_for(ens);
  EXPECT_EQ(var_cond_expect(ens, m, {1}), 0.0);
  EXPECT_EQ(var_cond_expect(ens, m, {1, 2}), 0.0);
}

TEST(SobolV, InteractionTreeDecomposition) {
  const Ensemble ens = interaction_ensemble_2d();
  const ProductMeasure m = uniform_for(ens);
  SobolCache cache(ens, m);
  // indicator of the upper-right quadrant: Bernoulli(1/4)
  EXPECT_NEAR(cache.total_variance(), 0.1875, 1e-15);
  EXPECT_NEAR(cache.sobol_V({0}), 0.0625, 1e-15);
  EXPECT_NEAR(cache.sobol_V({1}), 0.0625, 1e-15);
  EXPECT_NEAR(cache.sobol_V({0, 1}), 0.0625, 1e-15);
  EXPECT_NEAR(cache.sobol_S({0}), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(cache.sobol_S({0, 1}), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(cache.total_effect(0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(cache.total_effect(1), 2.0 / 3.0, 1e-12);
}

TEST(SobolV, AdditiveEnsembleHasNoInteractions) {
  Ensemble ens;
  ens.domain = Domain::unit_cube(3);
  for (int j = 0; j < 3; ++j) {
    Tree tree = Tree::stump(0.0);
    split_leaf(tree, 0, j, 0.3 + 0.2 * j, -1.0 - j, 2.0 + j);
    ens.trees.push_back(tree);
  }
  const ProductMeasure m = uniform_for(ens);
  SobolCache cache(ens, m);
  for (const auto& [set, v] : full_decomposition(ens, m, 3)) {
    if (set.size() >= 2) {
      EXPECT_NEAR(v, 0.0, 1e-12);
    }
  }
  // purely additive: T_i = S_i and they sum to one
  double sum_t = 0.0;
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(cache.total_effect(j), cache.sobol_S({j}), 1e-12);
    sum_t += cache.total_effect(j);
  }
  EXPECT_NEAR(sum_t, 1.0, 1e-12);
}

TEST(SobolV, TotalVarianceMatchesMonteCarlo) {
  Rng rng(31);
  const Ensemble ens = random_ensemble(rng, 3, 5, 7);
  const ProductMeasure m = uniform_for(ens);
  const double exact = total_variance(ens, m);

  Rng mc(77);
  const std::size_t n = 1000000;
  double mean = 0.0, second = 0.0;
  std::vector<double> x(3);
  for (std::size_t s = 0; s < n; ++s) {
    for (double& v : x) v = mc.uniform();
    const double y = ensemble_eval(ens, x);
    mean += y;
    second += y * y;
  }
  mean /= n;
  second /= n;
  const double est = second - mean * mean;
  EXPECT_NEAR(est, exact, 0.01 * exact);
}

TEST(SobolS, TwoTreeEnsembleRatio) {
  const Ensemble ens = two_tree_ensemble_2d();
  const ProductMeasure m = uniform_for(ens);
  SobolCache cache(ens, m);
  EXPECT_NEAR(cache.total_variance(), 2450.25 + 8.0 / 3.0, 1e-9);
  EXPECT_NEAR(cache.sobol_S({0}), 0.998913, 1e-6);
  // additive in the two inputs: T_i = S_i here
  EXPECT_NEAR(cache.total_effect(0), cache.sobol_S({0}), 1e-12);
}

TEST(Decomposition, PartialVariancesSumToTotal) {
  Rng rng(41);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = 2 + static_cast<int>(rng.uniform_int(3));
    const Ensemble ens = random_ensemble(rng, p, 6, 8);
    const ProductMeasure m = uniform_for(ens);
    SobolCache cache(ens, m);
    const double total = cache.total_variance();
    if (!(total > 0.0)) continue;
    double sum_v = 0.0, sum_s = 0.0;
    for (const auto& [set, v] : full_decomposition(ens, m, p)) {
      sum_v += v;
      sum_s += v / total;
    }
    EXPECT_NEAR(sum_v, total, 1e-9 * total);
    EXPECT_NEAR(sum_s, 1.0, 1e-9);
    // total effects from the complement identity match the subset sum
    for (int i = 0; i < p; ++i) {
      double direct = 0.0;
      for (const auto& [set, v] : full_decomposition(ens, m, p))
        if (std::binary_search(set.begin(), set.end(), i)) direct += v / total;
      EXPECT_NEAR(cache.total_effect(i), direct, 1e-9);
    }
  }
}

TEST(Pruning, PrunedAndUnprunedAgreeBitwise) {
  Rng rng(53);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = 2 + static_cast<int>(rng.uniform_int(3));
    const Ensemble ens = random_ensemble(rng, p, 6, 8);
    const ProductMeasure m = uniform_for(ens);
    SobolCache cache(ens, m);
    for (int i = 0; i < p; ++i) {
      const IndexSet set{i};
      EXPECT_EQ(cache.closed_variance(set), cache.closed_variance_unpruned(set));
    }
    const IndexSet pair{0, p - 1};
    EXPECT_EQ(cache.closed_variance(pair), cache.closed_variance_unpruned(pair));
  }
}

TEST(Pruning, KernelTermCountsShrink) {
  // half the trees ignore dim 0 and carry most of the leaves
  Ensemble ens;
  ens.domain = Domain::unit_cube(2);
  Rng rng(61);
  for (int t = 0; t < 3; ++t) {
    Tree tree = Tree::stump(0.0);
    split_leaf(tree, 0, 0, 0.5, rng.normal(), rng.normal());
    ens.trees.push_back(tree);
  }
  for (int t = 0; t < 3; ++t) {
    // chain splits on dim 1 only, 8 leaves each
    Tree tree = Tree::stump(rng.normal());
    for (int grow = 0; grow < 7; ++grow) {
      int leaf = 0;
      while (!tree.nodes[leaf].is_leaf()) leaf = tree.nodes[leaf].right;
      split_leaf(tree, leaf, 1, 0.1 + 0.1 * grow, rng.normal(), rng.normal());
    }
    ens.trees.push_back(tree);
  }
  const ProductMeasure m = uniform_for(ens);
  SobolCache cache(ens, m);
  const std::size_t pruned = cache.kernel_terms({0}, true);
  const std::size_t full = cache.kernel_terms({0}, false);
  EXPECT_GE(full, 5 * pruned);
  EXPECT_EQ(cache.closed_variance({0}), cache.closed_variance_unpruned({0}));
}

TEST(Invariance, LeafShiftLeavesVariancesAlone) {
  Rng rng(71);
  const Ensemble ens = random_ensemble(rng, 3, 4, 6);
  Ensemble shifted = ens;
  for (TreeNode& node : shifted.trees[0].nodes)
    if (node.is_leaf()) node.leaf += 17.5;
  const ProductMeasure m = uniform_for(ens);
  SobolCache a(ens, m), b(shifted, m);
  const double scale = std::max(1.0, a.total_variance());
  for (const auto& [set, v] : full_decomposition(ens, m, 3))
    EXPECT_NEAR(v, SobolCache(shifted, m).sobol_V(set), 1e-9 * scale);
  EXPECT_NEAR(a.total_variance(), b.total_variance(), 1e-9 * scale);
}

TEST(Invariance, LeafScaleIsQuadratic) {
  Rng rng(73);
  const Ensemble ens = random_ensemble(rng, 3, 4, 6);
  const double s = 3.25;
  Ensemble scaled = ens;
  for (Tree& tree : scaled.trees)
    for (TreeNode& node : tree.nodes)
      if (node.is_leaf()) node.leaf *= s;
  const ProductMeasure m = uniform_for(ens);
  SobolCache a(ens, m), b(scaled, m);
  for (const auto& [set, v] : full_decomposition(ens, m, 3)) {
    SobolCache bb(scaled, m);
    EXPECT_NEAR(bb.sobol_V(set), s * s * v, 1e-9 * std::max(1.0, s * s * std::abs(v)));
    if (a.total_variance() > 0.0) {
      EXPECT_NEAR(bb.sobol_S(set), a.sobol_S(set), 1e-9);
    }
  }
}

TEST(Report, DegenerateEnsembleFlagged) {
  const Ensemble ens = constant_ensemble(2, 3.0);
  const ProductMeasure m = uniform_for(ens);
  const SobolReport rep = report(ens, m);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_EQ(rep.total_variance, 0.0);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(rep.first_order_S[i], 0.0);
    EXPECT_EQ(rep.total_effect_S[i], 0.0);
  }
}

TEST(Aggregate, IdenticalDrawsEqualSingleReport) {
  const Ensemble ens = interaction_ensemble_2d();
  const ProductMeasure m = uniform_for(ens);
  std::vector<PosteriorDraw> posterior(5, PosteriorDraw{ens, 1.0});
  const AggregateReport agg = aggregate(posterior, m);
  const SobolReport single = report(ens, m);
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(agg.mean.first_order_S[i], single.first_order_S[i]);
    EXPECT_DOUBLE_EQ(agg.mean.total_effect_S[i], single.total_effect_S[i]);
  }
  EXPECT_EQ(agg.degenerate_draws, 0);
}

TEST(Aggregate, MeanOfPerDrawIndices) {
  Rng rng(83);
  std::vector<PosteriorDraw> posterior;
  posterior.push_back({random_ensemble(rng, 2, 3, 5), 1.0});
  posterior.push_back({random_ensemble(rng, 2, 3, 5), 1.0});
  const ProductMeasure m = uniform_for(posterior[0].ensemble);
  const AggregateReport agg = aggregate(posterior, m);
  for (int i = 0; i < 2; ++i) {
    const double expected =
        0.5 * (agg.per_draw[0].first_order_S[i] + agg.per_draw[1].first_order_S[i]);
    EXPECT_DOUBLE_EQ(agg.mean.first_order_S[i], expected);
  }
}

TEST(Aggregate, DegenerateDrawsExcludedAndCounted) {
  std::vector<PosteriorDraw> posterior;
  posterior.push_back({interaction_ensemble_2d(), 1.0});
  posterior.push_back({constant_ensemble(2, 9.0), 1.0});
  const ProductMeasure m = uniform_for(posterior[0].ensemble);
  const AggregateReport agg = aggregate(posterior, m);
  EXPECT_EQ(agg.degenerate_draws, 1);
  EXPECT_DOUBLE_EQ(agg.mean.first_order_S[0], agg.per_draw[0].first_order_S[0]);
}

TEST(Aggregate, ThreadCountDoesNotChangeResults) {
  Rng rng(91);
  std::vector<PosteriorDraw> posterior;
  for (int d = 0; d < 7; ++d) posterior.push_back({random_ensemble(rng, 3, 4, 6), 1.0});
  const ProductMeasure m = uniform_for(posterior[0].ensemble);
  const AggregateReport one = aggregate(posterior, m, {true, 1});
  const AggregateReport two = aggregate(posterior, m, {true, 2});
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(one.mean.first_order_S[i], two.mean.first_order_S[i]);
    EXPECT_EQ(one.mean.total_effect_S[i], two.mean.total_effect_S[i]);
  }
  for (std::size_t k = 0; k < one.mean.second_order.size(); ++k)
    EXPECT_EQ(one.mean.second_order[k].S, two.mean.second_order[k].S);
}

TEST(ReportCsv, DrawSetColumns) {
  const Ensemble ens = interaction_ensemble_2d();
  const ProductMeasure m = uniform_for(ens);
  std::ostringstream single;
  write_report_csv(single, report(ens, m));
  EXPECT_NE(single.str().find("draw,set,V,S,T\n"), std::string::npos);
  EXPECT_NE(single.str().find("0,total,"), std::string::npos);
  EXPECT_NE(single.str().find("0,1+2,"), std::string::npos);

  std::vector<PosteriorDraw> posterior(2, PosteriorDraw{ens, 1.0});
  std::ostringstream agg;
  write_aggregate_csv(agg, aggregate(posterior, m));
  EXPECT_NE(agg.str().find("\n1,total,"), std::string::npos);
  EXPECT_NE(agg.str().find("mean,1,"), std::string::npos);
}

TEST(EngineVsOracle, RandomEnsemblesAgree) {
  Rng rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 1 + static_cast<int>(rng.uniform_int(4));
    const Ensemble ens = random_ensemble(rng, p, 6, 8);
    const ProductMeasure m = uniform_for(ens);
    SobolCache cache(ens, m);
    GridOracle oracle(ens, m);
    const double tol = 1e-10 * std::max(1.0, cache.total_variance());
    for (const auto& [set, v] : full_decomposition(ens, m, p))
      EXPECT_NEAR(v, oracle.sobol_V(set), tol);
  }
}
