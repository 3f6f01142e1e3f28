#include "treesobol/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "treesobol/rng.hpp"

namespace treesobol {

GridDecomposition::GridDecomposition(const Ensemble& ens, const ProductMeasure& measure,
                                     std::size_t max_cells) {
  const int p = ens.dim();
  breaks_.resize(p);
  probs_.resize(p);
  sizes_.resize(p);
  std::size_t cells = 1;
  for (int j = 0; j < p; ++j) {
    breaks_[j].push_back(ens.domain.lo[j]);
    for (double cut : unique_cutpoints(ens, j)) breaks_[j].push_back(cut);
    breaks_[j].push_back(ens.domain.hi[j]);
    sizes_[j] = static_cast<int>(breaks_[j].size()) - 1;
    probs_[j].resize(sizes_[j]);
    for (int c = 0; c < sizes_[j]; ++c) {
      const Interval cell{breaks_[j][c], breaks_[j][c + 1], c + 1 == sizes_[j]};
      probs_[j][c] = measure.interval_prob(j, cell);
    }
    if (cells > max_cells / sizes_[j])
      throw std::runtime_error("grid oracle: cell budget exceeded");
    cells *= sizes_[j];
  }

  // midpoints never sit on a cut hyperplane, so each evaluation reads
  // the constant the ensemble takes on the whole open cell
  values_.resize(cells);
  std::vector<int> idx(p, 0);
  std::vector<double> x(p);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    for (int j = 0; j < p; ++j) x[j] = 0.5 * (breaks_[j][idx[j]] + breaks_[j][idx[j] + 1]);
    values_[flat] = ensemble_eval(ens, x);
    for (int j = p - 1; j >= 0; --j) {
      if (++idx[j] < sizes_[j]) break;
      idx[j] = 0;
    }
  }
}

void GridDecomposition::for_each_cell(
    const std::function<void(std::span<const int>, double, double)>& fn) const {
  const int p = static_cast<int>(sizes_.size());
  std::vector<int> idx(p, 0);
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    double mass = 1.0;
    for (int j = 0; j < p; ++j) mass *= probs_[j][idx[j]];
    fn(idx, mass, values_[flat]);
    for (int j = p - 1; j >= 0; --j) {
      if (++idx[j] < sizes_[j]) break;
      idx[j] = 0;
    }
  }
}

double GridDecomposition::total_mass() const {
  double sum = 0.0;
  for_each_cell([&](std::span<const int>, double mass, double) { sum += mass; });
  return sum;
}

GridOracle::GridOracle(const Ensemble& ens, const ProductMeasure& measure,
                       std::size_t max_cells)
    : grid_(ens, measure, max_cells) {}

double GridOracle::closed_variance(const IndexSet& set) {
  const int p = static_cast<int>(grid_.sizes_.size());
  validate_index_set(set, p);
  if (set.empty()) return 0.0;
  auto it = closed_.find(set);
  if (it != closed_.end()) return it->second;

  // accumulate mass-weighted values per projected cell
  std::size_t proj_cells = 1;
  for (int j : set) proj_cells *= grid_.sizes_[j];
  std::vector<double> weighted(proj_cells, 0.0);
  grid_.for_each_cell([&](std::span<const int> idx, double mass, double value) {
    std::size_t key = 0;
    for (int j : set) key = key * grid_.sizes_[j] + idx[j];
    weighted[key] += mass * value;
  });

  double mean = 0.0;
  for (double w : weighted) mean += w;
  double var = -mean * mean;
  // Var = sum over projected cells of h^2 * massP, with h = weighted/massP
  std::vector<int> idx(set.size(), 0);
  for (std::size_t key = 0; key < proj_cells; ++key) {
    double mass = 1.0;
    for (std::size_t k = 0; k < set.size(); ++k) mass *= grid_.probs_[set[k]][idx[k]];
    if (mass > 0.0) var += weighted[key] * weighted[key] / mass;
    for (int k = static_cast<int>(set.size()) - 1; k >= 0; --k) {
      if (++idx[k] < grid_.sizes_[set[k]]) break;
      idx[k] = 0;
    }
  }
  if (var < 0.0) var = 0.0;
  closed_.emplace(set, var);
  return var;
}

double GridOracle::sobol_V(const IndexSet& set) {
  if (set.empty()) throw std::invalid_argument("grid sobol_V: empty index set");
  auto it = partial_.find(set);
  if (it != partial_.end()) return it->second;
  double v = closed_variance(set);
  const std::size_t m = set.size();
  IndexSet subset;
  for (std::size_t mask = 1; m > 1 && mask + 1 < (std::size_t{1} << m); ++mask) {
    subset.clear();
    for (std::size_t b = 0; b < m; ++b)
      if (mask & (std::size_t{1} << b)) subset.push_back(set[b]);
    v -= sobol_V(subset);
  }
  partial_.emplace(set, v);
  return v;
}

double GridOracle::total_variance() {
  IndexSet all(grid_.sizes_.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return closed_variance(all);
}

double grid_sobol_V(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set,
                    std::size_t max_cells) {
  GridOracle oracle(ens, measure, max_cells);
  return oracle.sobol_V(set);
}

namespace {

struct PickFreeze {
  std::vector<double> y_a, y_b, y_c;
  double pooled_mean = 0.0;
};

PickFreeze pick_freeze(const McFunction& f, int p, const IndexSet& set, std::size_t n,
                       std::uint64_t seed) {
  if (n < 1000) throw std::invalid_argument("mc oracle: needs at least 1e3 samples");
  Rng rng(seed);
  PickFreeze pf;
  pf.y_a.resize(n);
  pf.y_b.resize(n);
  pf.y_c.resize(n);
  std::vector<double> a(p), b(p), c(p);
  for (std::size_t s = 0; s < n; ++s) {
    for (int j = 0; j < p; ++j) a[j] = rng.uniform();
    for (int j = 0; j < p; ++j) b[j] = rng.uniform();
    c = b;
    for (int j : set) c[j] = a[j];  // freeze the X_P block
    pf.y_a[s] = f(a);
    pf.y_b[s] = f(b);
    pf.y_c[s] = f(c);
    pf.pooled_mean += pf.y_a[s] + pf.y_b[s];
  }
  pf.pooled_mean /= static_cast<double>(2 * n);
  return pf;
}

McEstimate moment_estimate(std::span<const double> g) {
  const std::size_t n = g.size();
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : g) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

}  // namespace

McEstimate mc_closed_variance(const McFunction& f, int p, const IndexSet& set,
                              std::size_t n_samples, std::uint64_t seed) {
  validate_index_set(set, p);
  const PickFreeze pf = pick_freeze(f, p, set, n_samples, seed);
  std::vector<double> g(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s)
    g[s] = (pf.y_a[s] - pf.pooled_mean) * (pf.y_c[s] - pf.pooled_mean);
  return moment_estimate(g);
}

McEstimate mc_total_variance(const McFunction& f, int p, std::size_t n_samples,
                             std::uint64_t seed) {
  const PickFreeze pf = pick_freeze(f, p, {}, n_samples, seed);
  std::vector<double> g(2 * n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    g[2 * s] = (pf.y_a[s] - pf.pooled_mean) * (pf.y_a[s] - pf.pooled_mean);
    g[2 * s + 1] = (pf.y_b[s] - pf.pooled_mean) * (pf.y_b[s] - pf.pooled_mean);
  }
  return moment_estimate(g);
}

McEstimate mc_first_order(const McFunction& f, int p, int dim, std::size_t n_samples,
                          std::uint64_t seed) {
  const McEstimate w = mc_closed_variance(f, p, {dim}, n_samples, seed);
  const McEstimate v = mc_total_variance(f, p, n_samples, seed + 1);
  if (!(v.value > 0.0)) return {0.0, 0.0};
  return {w.value / v.value, w.std_err / v.value};
}

McEstimate mc_total_effect(const McFunction& f, int p, int dim, std::size_t n_samples,
                           std::uint64_t seed) {
  IndexSet rest;
  for (int j = 0; j < p; ++j)
    if (j != dim) rest.push_back(j);
  const McEstimate w = mc_closed_variance(f, p, rest, n_samples, seed);
  const McEstimate v = mc_total_variance(f, p, n_samples, seed + 1);
  if (!(v.value > 0.0)) return {0.0, 0.0};
  return {1.0 - w.value / v.value, w.std_err / v.value};
}

}  // namespace treesobol
