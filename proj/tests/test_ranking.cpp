#include "treesobol/ranking.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "treesobol/rng.hpp"

using namespace treesobol;

TEST(CompetitionRank, PaperExamples) {
  const std::vector<double> a{0.1, 0.1, 0.2, 0.2, 0.35, 0.05};
  EXPECT_EQ(competition_rank(a).ranks, (std::vector<int>{4, 4, 2, 2, 1, 6}));

  const std::vector<double> friedman{0.197, 0.197, 0.093, 0.350, 0.087};
  EXPECT_EQ(competition_rank(friedman, 1e-12).ranks, (std::vector<int>{2, 2, 4, 1, 5}));

  const std::vector<double> equal{1.0, 1.0, 1.0};
  EXPECT_EQ(competition_rank(equal).ranks, (std::vector<int>{1, 1, 1}));
}

TEST(CompetitionRank, ChainedToleranceTies) {
  // consecutive gaps of 0.5 chain into one group at tol 0.5
  const std::vector<double> v{1.0, 1.5, 2.0};
  EXPECT_EQ(competition_rank(v, 0.5).ranks, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(competition_rank(v, 0.4).ranks, (std::vector<int>{3, 2, 1}));
}

TEST(Ranking, ValidatesCompetitionForm) {
  EXPECT_NO_THROW(validate_ranking({{4, 4, 2, 2, 1, 6}}));
  EXPECT_NO_THROW(validate_ranking({{1, 1, 1}}));
  EXPECT_THROW(validate_ranking({{1, 1, 2}}), std::invalid_argument);  // gap missing
  EXPECT_THROW(validate_ranking({{2, 3, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(validate_ranking({{0, 1}}), std::invalid_argument);
  EXPECT_THROW(validate_ranking({{}}), std::invalid_argument);
}

TEST(Discordances, WorkedExample) {
  const Ranking truth{{4, 3, 1, 2}};
  const Ranking other{{3, 1, 2, 4}};
  EXPECT_EQ(discordances(truth, other), (std::vector<int>{1, 2, 0, 0}));
  EXPECT_EQ(d_r(truth, other), 6);
}

TEST(Discordances, IdentityAndAllTied) {
  const Ranking r{{3, 1, 2, 4}};
  EXPECT_EQ(discordances(r, r), (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(d_r(r, r), 0);

  const Ranking tied{{1, 1, 1, 1}};
  EXPECT_EQ(discordances(tied, r), (std::vector<int>{0, 0, 0, 0}));
}

TEST(Discordances, ErrorsOnBadInput) {
  EXPECT_THROW(discordances({{1, 2}}, {{1, 2, 3}}), std::invalid_argument);
  EXPECT_THROW(discordances({{1, 1, 2}}, {{1, 2, 3}}), std::invalid_argument);
}

TEST(DR, ReversedRankingsReachTheMaximum) {
  for (int q = 2; q <= 7; ++q) {
    std::vector<int> fwd(q), rev(q);
    std::iota(fwd.begin(), fwd.end(), 1);
    for (int i = 0; i < q; ++i) rev[i] = q - i;
    EXPECT_EQ(d_r({fwd}, {rev}), q * (q - 1));
  }
}

TEST(DR, NeverExceedsTheTableMaximum) {
  // q(q-1) = 2 C(q,2) bounds the discrepancy for any pair, ties or not
  Rng rng(349);
  for (int rep = 0; rep < 2000; ++rep) {
    const int q = 2 + static_cast<int>(rng.uniform_int(9));
    std::vector<double> a(q), b(q);
    for (int i = 0; i < q; ++i) {
      a[i] = rng.uniform_int(4);  // coarse values force ties
      b[i] = rng.uniform_int(4);
    }
    const int d = d_r(competition_rank(a), competition_rank(b));
    EXPECT_GE(d, 0);
    EXPECT_LE(d, q * (q - 1));
    EXPECT_EQ(d % 2, 0);
  }
}

TEST(KemenySnell, HandValues) {
  EXPECT_DOUBLE_EQ(kemeny_snell({{1, 2}}, {{1, 2}}), 0.0);
  EXPECT_DOUBLE_EQ(kemeny_snell({{1, 1}}, {{1, 2}}), 1.0);
  EXPECT_DOUBLE_EQ(kemeny_snell({{4, 3, 1, 2}}, {{3, 1, 2, 4}}), 6.0);
}

namespace {

std::vector<std::vector<int>> all_permutations(int q) {
  std::vector<int> perm(q);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

TEST(TheoremDistance, ExhaustiveUntiedPairsUpToFive) {
  for (int q = 2; q <= 5; ++q) {
    const auto perms = all_permutations(q);
    for (const auto& a : perms)
      for (const auto& b : perms)
        ASSERT_EQ(static_cast<double>(d_r({a}, {b})), kemeny_snell({a}, {b}));
  }
}

TEST(TheoremDistance, RandomUntiedPairsUpToEight) {
  Rng rng(311);
  for (int rep = 0; rep < 10000; ++rep) {
    const int q = 2 + static_cast<int>(rng.uniform_int(7));
    std::vector<int> a(q), b(q);
    std::iota(a.begin(), a.end(), 1);
    std::iota(b.begin(), b.end(), 1);
    for (int i = q - 1; i > 0; --i) {
      std::swap(a[i], a[rng.uniform_int(i + 1)]);
      std::swap(b[i], b[rng.uniform_int(i + 1)]);
    }
    ASSERT_EQ(static_cast<double>(d_r({a}, {b})), kemeny_snell({a}, {b}));
  }
}

TEST(TheoremInertItems, BottomTiedItemsContributeNothing) {
  Rng rng(313);
  for (int rep = 0; rep < 1000; ++rep) {
    const int q0 = 2 + static_cast<int>(rng.uniform_int(4));
    const int extra = 1 + static_cast<int>(rng.uniform_int(4));
    const int q = q0 + extra;

    // untied active head in both rankings
    std::vector<double> truth_vals(q0), other_vals(q0);
    for (int i = 0; i < q0; ++i) {
      truth_vals[i] = 1.0 + rng.uniform();
      other_vals[i] = 1.0 + rng.uniform();
    }
    const Ranking truth_head = competition_rank(truth_vals);
    const Ranking other_head = competition_rank(other_vals);
    const std::vector<int> w_head = discordances(truth_head, other_head);

    // append inert items: tied at zero activity in the truth, arbitrary
    // placement in the model ranking
    std::vector<double> truth_full = truth_vals;
    std::vector<double> other_full = other_vals;
    for (int e = 0; e < extra; ++e) {
      truth_full.push_back(0.0);
      other_full.push_back(rng.uniform() * 3.0);  // may even outrank actives
    }
    const Ranking truth_ext = competition_rank(truth_full);
    const Ranking other_ext = competition_rank(other_full);
    const std::vector<int> w_ext = discordances(truth_ext, other_ext);

    ASSERT_EQ(static_cast<int>(w_ext.size()), q);
    for (int k = q0; k < q; ++k) EXPECT_EQ(w_ext[k], 0);

    // when the inert items also sit at the bottom of the model ranking,
    // the active-stage discordances are untouched and d_r is invariant
    std::vector<double> other_bottom = other_vals;
    for (int e = 0; e < extra; ++e) other_bottom.push_back(rng.uniform() - 2.0);
    const Ranking other_bot = competition_rank(other_bottom);
    const std::vector<int> w_bot = discordances(truth_ext, other_bot);
    for (int k = 0; k < q0; ++k) EXPECT_EQ(w_bot[k], w_head[k]);
    for (int k = q0; k < q; ++k) EXPECT_EQ(w_bot[k], 0);
    EXPECT_EQ(d_r(truth_ext, other_bot), d_r(truth_head, other_head));
  }
}

TEST(TheoremTiedGroups, PermutingModelRanksInsideATruthTieGroup) {
  Rng rng(317);
  for (int rep = 0; rep < 1000; ++rep) {
    const int q = 4 + static_cast<int>(rng.uniform_int(5));
    // engineer a tie group of size u in the truth
    const int u = 2 + static_cast<int>(rng.uniform_int(std::min(3, q - 1)));
    std::vector<double> truth_vals(q);
    for (int i = 0; i < q; ++i) truth_vals[i] = rng.uniform();
    const double tied_value = 2.0;
    std::vector<int> group(q);
    std::iota(group.begin(), group.end(), 0);
    for (int i = q - 1; i > 0; --i) std::swap(group[i], group[rng.uniform_int(i + 1)]);
    group.resize(u);
    for (int idx : group) truth_vals[idx] = tied_value;

    std::vector<double> other_vals(q);
    for (int i = 0; i < q; ++i) other_vals[i] = rng.uniform();

    const Ranking truth = competition_rank(truth_vals);
    const Ranking other = competition_rank(other_vals);
    const std::vector<int> w_base = discordances(truth, other);

    // permute the model values (hence ranks) within the tied group
    std::vector<double> permuted = other_vals;
    for (int i = u - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(i + 1));
      std::swap(permuted[group[i]], permuted[group[j]]);
    }
    const Ranking other_perm = competition_rank(permuted);
    EXPECT_EQ(discordances(truth, other_perm), w_base);
    EXPECT_EQ(d_r(truth, other_perm), d_r(truth, other));
  }
}

TEST(MetricSanity, SymmetryAndTriangleOnUntiedRankings) {
  for (int q = 2; q <= 5; ++q) {
    const auto perms = all_permutations(q);
    const int n = static_cast<int>(perms.size());
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, 0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dist[a][b] = d_r({perms[a]}, {perms[b]});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        ASSERT_EQ(dist[a][b], dist[b][a]);
        ASSERT_EQ(dist[a][b] == 0, a == b);
      }
    if (q <= 4) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            ASSERT_LE(dist[a][c], dist[a][b] + dist[b][c]);
    } else {
      // spot-check triangles at q = 5
      Rng rng(331);
      for (int rep = 0; rep < 200000; ++rep) {
        const int a = static_cast<int>(rng.uniform_int(n));
        const int b = static_cast<int>(rng.uniform_int(n));
        const int c = static_cast<int>(rng.uniform_int(n));
        ASSERT_LE(dist[a][c], dist[a][b] + dist[b][c]);
      }
    }
  }
}
