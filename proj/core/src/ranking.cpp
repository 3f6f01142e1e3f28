#include "treesobol/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace treesobol {

void validate_ranking(const Ranking& ranking) {
  if (ranking.ranks.empty()) throw std::invalid_argument("ranking: empty");
  std::vector<int> sorted = ranking.ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    // position k (0-based) must carry rank k+1 unless tied with its predecessor
    if (sorted[k] != static_cast<int>(k) + 1 && (k == 0 || sorted[k] != sorted[k - 1]))
      throw std::invalid_argument("ranking: not a valid competition ranking");
  }
}

Ranking competition_rank(std::span<const double> values, double tie_tol) {
  if (values.empty()) throw std::invalid_argument("competition_rank: empty input");
  if (tie_tol < 0.0) throw std::invalid_argument("competition_rank: negative tie_tol");
  const int q = static_cast<int>(values.size());
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  Ranking out;
  out.ranks.assign(q, 0);
  int group_start = 0;
  for (int k = 0; k < q; ++k) {
    // chained ties: a gap within tie_tol extends the current group
    if (k > 0 && values[order[k - 1]] - values[order[k]] > tie_tol) group_start = k;
    out.ranks[order[k]] = group_start + 1;
  }
  return out;
}

namespace {

// Fenwick tree counting remaining items by rank value.
class BitCounter {
 public:
  explicit BitCounter(int n) : tree_(n + 1, 0) {}
  void add(int pos, int delta) {
    for (int i = pos; i < static_cast<int>(tree_.size()); i += i & -i) tree_[i] += delta;
  }
  int prefix(int pos) const {
    int s = 0;
    for (int i = pos; i > 0; i -= i & -i) s += tree_[i];
    return s;
  }

 private:
  std::vector<int> tree_;
};

}  // namespace

std::vector<int> discordances(const Ranking& truth, const Ranking& other) {
  validate_ranking(truth);
  validate_ranking(other);
  if (truth.size() != other.size())
    throw std::invalid_argument("discordances: rankings must have the same length");
  const int q = truth.size();

  // truth tie-groups in rank order; items inside a group kept in index order
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return truth.ranks[a] < truth.ranks[b]; });

  BitCounter remaining(q);
  for (int i = 0; i < q; ++i) remaining.add(other.ranks[i], 1);

  std::vector<int> w;
  w.reserve(q);
  int g = 0;
  while (g < q) {
    int g_end = g;
    while (g_end < q && truth.ranks[order[g_end]] == truth.ranks[order[g]]) ++g_end;
    std::vector<int> group(order.begin() + g, order.begin() + g_end);
    // the group shrinks by one item per stage
    while (!group.empty()) {
      int best_pos = q + 1;
      std::size_t best_at = 0;
      for (std::size_t c = 0; c < group.size(); ++c) {
        const int pos = 1 + remaining.prefix(other.ranks[group[c]] - 1);
        if (pos < best_pos) {
          best_pos = pos;
          best_at = c;
        }
      }
      w.push_back(best_pos - 1);
      remaining.add(other.ranks[group[best_at]], -1);
      group.erase(group.begin() + best_at);
    }
    g = g_end;
  }
  return w;
}

int d_r(const Ranking& truth, const Ranking& other) {
  int sum = 0;
  for (int wk : discordances(truth, other)) sum += wk;
  return 2 * sum;
}

double kemeny_snell(const Ranking& a, const Ranking& b) {
  validate_ranking(a);
  validate_ranking(b);
  if (a.size() != b.size())
    throw std::invalid_argument("kemeny_snell: rankings must have the same length");
  const int q = a.size();
  auto pref = [](const Ranking& r, int i, int j) -> int {
    if (r.ranks[i] < r.ranks[j]) return 1;
    if (r.ranks[i] > r.ranks[j]) return -1;
    return 0;
  };
  double sum = 0.0;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      if (i != j) sum += std::abs(pref(a, i, j) - pref(b, i, j));
  return 0.5 * sum;
}

}  // namespace treesobol
