#include "treesobol/activity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace treesobol {

std::vector<long> one_way_counts(const Ensemble& ens) {
  std::vector<long> counts(ens.dim(), 0);
  for (const Tree& tree : ens.trees)
    for (const TreeNode& node : tree.nodes)
      if (!node.is_leaf()) ++counts[node.split.dim];
  return counts;
}

std::vector<long> unique_rule_counts(const Ensemble& ens) {
  std::vector<long> counts(ens.dim(), 0);
  for (int j = 0; j < ens.dim(); ++j)
    counts[j] = static_cast<long>(unique_cutpoints(ens, j).size());
  return counts;
}

double PiecewiseConstant1D::value_at(double x) const {
  if (x < breakpoints.front() || x > breakpoints.back())
    throw std::invalid_argument("PiecewiseConstant1D: point outside margin");
  // last cell is closed at the top
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  int cell = static_cast<int>(it - breakpoints.begin()) - 1;
  if (cell >= cell_count()) cell = cell_count() - 1;
  return values[cell];
}

double PiecewiseConstant1D::variance(const ProductMeasure& measure) const {
  double mean = 0.0, second = 0.0;
  for (int c = 0; c < cell_count(); ++c) {
    const Interval cell{breakpoints[c], breakpoints[c + 1], c + 1 == cell_count()};
    const double mass = measure.interval_prob(dim, cell);
    mean += mass * values[c];
    second += mass * values[c] * values[c];
  }
  return second - mean * mean;
}

PiecewiseConstant1D cond_expect_1d(const Ensemble& ens, const ProductMeasure& measure, int dim) {
  if (dim < 0 || dim >= ens.dim())
    throw std::invalid_argument("cond_expect_1d: dimension out of range");
  PiecewiseConstant1D f;
  f.dim = dim;
  f.breakpoints.push_back(ens.domain.lo[dim]);
  for (double cut : unique_cutpoints(ens, dim)) f.breakpoints.push_back(cut);
  f.breakpoints.push_back(ens.domain.hi[dim]);
  f.values.assign(f.breakpoints.size() - 1, 0.0);

  for (const Tree& tree : ens.trees) {
    for (const TerminalRegion& region : terminal_regions(tree, ens.domain)) {
      double d = region.mu;
      for (int j : region.split_dims)
        if (j != dim) d *= measure.interval_prob(j, region.box[j]);
      // the region's dim-interval is a union of cells; endpoints are
      // exact copies of breakpoints, so the lookups are exact
      const Interval& iv = region.box[dim];
      const auto lo_it = std::lower_bound(f.breakpoints.begin(), f.breakpoints.end(), iv.lo);
      const auto hi_it = std::lower_bound(f.breakpoints.begin(), f.breakpoints.end(), iv.hi);
      const int lo_cell = static_cast<int>(lo_it - f.breakpoints.begin());
      const int hi_cell = static_cast<int>(hi_it - f.breakpoints.begin());
      for (int c = lo_cell; c < hi_cell; ++c) f.values[c] += d;
    }
  }
  return f;
}

int jump_count(const PiecewiseConstant1D& f, double tol) {
  int jumps = 0;
  for (int c = 0; c + 1 < f.cell_count(); ++c)
    if (std::abs(f.values[c + 1] - f.values[c]) > tol) ++jumps;
  return jumps;
}

Standardized standardize(const PiecewiseConstant1D& f) {
  const int K = f.cell_count();
  if (K < 2) throw std::invalid_argument("standardize: needs at least two cells");
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b)
      if (f.values[a] == f.values[b])
        throw std::invalid_argument("standardize: duplicate levels violate the precondition");

  double mean = 0.0;
  for (double v : f.values) mean += v;
  mean /= K;
  double ss = 0.0;
  for (double v : f.values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / (K - 1));  // corrected sample sd

  Standardized out;
  out.cell_mass = 1.0 / K;
  out.fn.dim = f.dim;
  const double lo = f.breakpoints.front();
  const double hi = f.breakpoints.back();
  out.fn.breakpoints.resize(K + 1);
  for (int c = 0; c <= K; ++c)
    out.fn.breakpoints[c] = lo + (hi - lo) * static_cast<double>(c) / K;
  out.fn.breakpoints[K] = hi;
  out.fn.values.resize(K);
  const double scale = std::sqrt(static_cast<double>(K)) / s;
  for (int c = 0; c < K; ++c) out.fn.values[c] = scale * (f.values[c] - mean);
  return out;
}

double equal_mass_variance(const PiecewiseConstant1D& f) {
  const int K = f.cell_count();
  double mean = 0.0, second = 0.0;
  for (double v : f.values) {
    mean += v;
    second += v * v;
  }
  mean /= K;
  second /= K;
  return second - mean * mean;
}

void write_count_index_csv(std::ostream& os,
                           const std::vector<std::vector<long>>& per_draw_counts,
                           const std::vector<std::vector<long>>& per_draw_unique,
                           const std::vector<std::vector<double>>& per_draw_S) {
  os << "draw,dim,count,unique_count,S\n";
  for (std::size_t d = 0; d < per_draw_counts.size(); ++d) {
    for (std::size_t j = 0; j < per_draw_counts[d].size(); ++j) {
      os << d << ',' << (j + 1) << ',' << per_draw_counts[d][j] << ','
         << per_draw_unique[d][j] << ',' << per_draw_S[d][j] << '\n';
    }
  }
}

}  // namespace treesobol
