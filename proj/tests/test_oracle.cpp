#include "treesobol/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "treesobol/rng.hpp"

using namespace treesobol;
using testutil::interaction_ensemble_2d;
using testutil::random_ensemble;
using testutil::two_tree_ensemble_2d;

TEST(Grid, CellMassesSumToOne) {
  Rng rng(401);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 1 + static_cast<int>(rng.uniform_int(3));
    const Ensemble ens = random_ensemble(rng, p, 4, 6);
    const ProductMeasure m = ProductMeasure::uniform(ens.domain);
    const GridDecomposition grid(ens, m);
    EXPECT_NEAR(grid.total_mass(), 1.0, 1e-12);
  }
}

TEST(Grid, ValuesConstantPerCell) {
  const Ensemble ens = two_tree_ensemble_2d();
  const ProductMeasure m = ProductMeasure::uniform(ens.domain);
  const GridDecomposition grid(ens, m);
  EXPECT_EQ(grid.cell_count(), 6u);  // 2 cells on dim 0, 3 on dim 1
  Rng rng(402);
  grid.for_each_cell([&](std::span<const int> idx, double, double value) {
    // probe random interior points of the cell
    for (int probe = 0; probe < 5; ++probe) {
      std::vector<double> x(2);
      for (int j = 0; j < 2; ++j) {
        const auto& br = grid.breakpoints()[j];
        const double lo = br[idx[j]], hi = br[idx[j] + 1];
        x[j] = lo + (hi - lo) * (0.05 + 0.9 * rng.uniform());
      }
      EXPECT_EQ(ensemble_eval(ens, x), value);
    }
  });
}

TEST(Grid, BudgetEnforced) {
  Rng rng(403);
  const Ensemble ens = random_ensemble(rng, 3, 6, 8);
  const ProductMeasure m = ProductMeasure::uniform(ens.domain);
  EXPECT_THROW(GridDecomposition(ens, m, 4), std::runtime_error);
}

TEST(GridOracle, HandComputedValues) {
  const Ensemble pair = two_tree_ensemble_2d();
  const ProductMeasure m2 = ProductMeasure::uniform(pair.domain);
  GridOracle oracle(pair, m2);
  EXPECT_NEAR(oracle.sobol_V({0}), 2450.25, 1e-9);
  EXPECT_NEAR(oracle.sobol_V({1}), 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle.total_variance(), 2450.25 + 8.0 / 3.0, 1e-9);

  const Ensemble inter = interaction_ensemble_2d();
  GridOracle oracle2(inter, ProductMeasure::uniform(inter.domain));
  EXPECT_NEAR(oracle2.sobol_V({0, 1}), 0.0625, 1e-12);

  Ensemble flat;
  flat.domain = Domain::unit_cube(2);
  flat.trees = {Tree::stump(4.0)};
  GridOracle oracle3(flat, ProductMeasure::uniform(flat.domain));
  EXPECT_EQ(oracle3.total_variance(), 0.0);
}

TEST(McOracle, ConstantFunctionIsExactZero) {
  const auto constant = [](std::span<const double>) { return 3.5; };
  const McEstimate w = mc_closed_variance(constant, 3, {0}, 2000, 7);
  EXPECT_EQ(w.value, 0.0);
  EXPECT_EQ(w.std_err, 0.0);
}

TEST(McOracle, DeterministicUnderSeed) {
  const auto f = [](std::span<const double> x) { return x[0] + 2.0 * x[1] * x[2]; };
  const McEstimate a = mc_closed_variance(f, 3, {1, 2}, 5000, 42);
  const McEstimate b = mc_closed_variance(f, 3, {1, 2}, 5000, 42);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_err, b.std_err);
  const McEstimate c = mc_closed_variance(f, 3, {1, 2}, 5000, 43);
  EXPECT_NE(a.value, c.value);
}

TEST(McOracle, RecoversLinearFunctionIndices) {
  // f = x0 + 2 x1: V = 1/12 + 4/12, S_0 = 0.2, S_1 = 0.8, T = S
  const auto f = [](std::span<const double> x) { return x[0] + 2.0 * x[1]; };
  const McEstimate v = mc_total_variance(f, 2, 200000, 11);
  EXPECT_NEAR(v.value, 5.0 / 12.0, 4.0 * v.std_err);
  const McEstimate s0 = mc_first_order(f, 2, 0, 200000, 12);
  EXPECT_NEAR(s0.value, 0.2, 4.0 * s0.std_err + 1e-3);
  const McEstimate t1 = mc_total_effect(f, 2, 1, 200000, 13);
  EXPECT_NEAR(t1.value, 0.8, 4.0 * t1.std_err + 1e-3);
  EXPECT_THROW(mc_first_order(f, 2, 0, 100, 1), std::invalid_argument);
}

TEST(EngineVsGrid, ClosedVariancesAgreeTightly) {
  Rng rng(409);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 1 + static_cast<int>(rng.uniform_int(4));
    const Ensemble ens = random_ensemble(rng, p, 6, 8);
    const ProductMeasure m = ProductMeasure::uniform(ens.domain);
    SobolCache cache(ens, m);
    GridOracle oracle(ens, m);
    const double tol = 1e-10 * std::max(1.0, cache.total_variance());
    for (int i = 0; i < p; ++i)
      EXPECT_NEAR(cache.closed_variance({i}), oracle.closed_variance({i}), tol);
    EXPECT_NEAR(cache.total_variance(), oracle.total_variance(), tol);
  }
}
