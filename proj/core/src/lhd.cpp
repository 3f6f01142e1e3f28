#include "treesobol/lhd.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

#include "treesobol/rng.hpp"

namespace treesobol {

double min_pairwise_sq_distance(const std::vector<double>& design, int n, int p) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int k = 0; k < p; ++k) {
        const double diff = design[i * p + k] - design[j * p + k];
        d2 += diff * diff;
      }
      if (d2 < best) best = d2;
    }
  }
  return best;
}

std::vector<double> maximin_lhd(int n, int p, std::uint64_t seed, int restarts) {
  if (n < 2) throw std::invalid_argument("maximin_lhd: n must be >= 2");
  if (p < 1) throw std::invalid_argument("maximin_lhd: p must be >= 1");
  if (restarts < 1) throw std::invalid_argument("maximin_lhd: restarts must be >= 1");

  Rng rng(seed);
  std::vector<double> best;
  double best_score = -1.0;
  std::vector<int> perm(n);
  std::vector<double> candidate(static_cast<std::size_t>(n) * p);
  for (int r = 0; r < restarts; ++r) {
    for (int k = 0; k < p; ++k) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; --i)  // Fisher-Yates
        std::swap(perm[i], perm[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
      for (int i = 0; i < n; ++i)
        candidate[i * p + k] = (perm[i] + rng.uniform()) / n;
    }
    const double score = min_pairwise_sq_distance(candidate, n, p);
    if (score > best_score) {
      best_score = score;
      best = candidate;
    }
  }
  return best;
}

}  // namespace treesobol
