#include "treesobol/sobol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace treesobol {

namespace {

// clamp window for tiny negative kernel results (difference of products)
constexpr double kNegVarianceTol = 1e-12;

bool sets_intersect(std::span<const int> a, std::span<const int> b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (a[i] > b[j])
      ++j;
    else
      return true;
  }
  return false;
}

}  // namespace

IndexSet make_index_set(std::vector<int> dims) {
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  return dims;
}

void validate_index_set(const IndexSet& set, int p) {
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set[k] < 0 || set[k] >= p)
      throw std::invalid_argument("index set: dimension out of range");
    if (k > 0 && set[k] <= set[k - 1])
      throw std::invalid_argument("index set: must be sorted and deduplicated");
  }
}

IndexSet complement(const IndexSet& set, int p) {
  IndexSet out;
  out.reserve(p - set.size());
  std::size_t k = 0;
  for (int j = 0; j < p; ++j) {
    if (k < set.size() && set[k] == j)
      ++k;
    else
      out.push_back(j);
  }
  return out;
}

std::vector<CondExpectTerm> cond_expect_coeffs(const Ensemble& ens,
                                               const ProductMeasure& measure,
                                               const IndexSet& set) {
  validate_index_set(set, ens.dim());
  std::vector<CondExpectTerm> out;
  for (const Tree& tree : ens.trees) {
    for (const TerminalRegion& region : terminal_regions(tree, ens.domain)) {
      if (!sets_intersect(region.split_dims, set)) continue;  // constant in X_P
      CondExpectTerm term;
      term.coeff = region.mu;
      for (int j : region.split_dims) {
        if (!std::binary_search(set.begin(), set.end(), j))
          term.coeff *= measure.interval_prob(j, region.box[j]);
      }
      term.box.reserve(set.size());
      for (int j : set) term.box.push_back(region.box[j]);
      out.push_back(std::move(term));
    }
  }
  return out;
}

SobolCache::SobolCache(const Ensemble& ens, const ProductMeasure& measure) : p_(ens.dim()) {
  if (measure.dim() != p_)
    throw std::invalid_argument("SobolCache: measure dimension mismatch");
  for (const Tree& tree : ens.trees) {
    for (const TerminalRegion& tr : terminal_regions(tree, ens.domain)) {
      Region region;
      region.mu = tr.mu;
      region.begin = static_cast<int>(entries_.size());
      for (int j : tr.split_dims) {
        const Interval& iv = tr.box[j];
        Entry e;
        e.dim = j;
        e.prob = measure.interval_prob(j, iv);
        e.cdf_lo = measure.marginal(j).cdf(iv.lo);
        e.cdf_hi = measure.marginal(j).cdf(iv.hi);
        entries_.push_back(e);
      }
      region.end = static_cast<int>(entries_.size());
      regions_.push_back(region);
    }
  }
}

double SobolCache::kernel(const IndexSet& set, bool pruned) {
  // surviving terms: d_k, the projected box probability, and the
  // projected entries (dims in P that the region actually restricts)
  std::vector<double> d, pp;
  std::vector<int> begin, end;
  std::vector<Entry> proj;
  for (const Region& region : regions_) {
    double coeff = region.mu;
    const int b = static_cast<int>(proj.size());
    std::size_t s = 0;
    for (int e = region.begin; e < region.end; ++e) {
      const Entry& entry = entries_[e];
      while (s < set.size() && set[s] < entry.dim) ++s;
      if (s < set.size() && set[s] == entry.dim)
        proj.push_back(entry);
      else
        coeff *= entry.prob;
    }
    const int n_proj = static_cast<int>(proj.size()) - b;
    if (pruned && n_proj == 0) {
      proj.resize(b);
      continue;
    }
    double boxp = 1.0;
    for (int k = b; k < b + n_proj; ++k) boxp *= proj[k].prob;
    d.push_back(coeff);
    pp.push_back(boxp);
    begin.push_back(b);
    end.push_back(b + n_proj);
  }

  const std::size_t n = d.size();
  double var = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    var += d[k] * d[k] * (pp[k] - pp[k] * pp[k]);
    for (std::size_t l = k + 1; l < n; ++l) {
      // P(R_k^P ∩ R_l^P): merge the two restricted-dim lists; dims
      // restricted by only one side contribute that side's mass
      double q = 1.0;
      int i = begin[k], j = begin[l];
      while (i < end[k] || j < end[l]) {
        if (j >= end[l] || (i < end[k] && proj[i].dim < proj[j].dim)) {
          q *= proj[i].prob;
          ++i;
        } else if (i >= end[k] || proj[j].dim < proj[i].dim) {
          q *= proj[j].prob;
          ++j;
        } else {
          const double mass =
              std::min(proj[i].cdf_hi, proj[j].cdf_hi) - std::max(proj[i].cdf_lo, proj[j].cdf_lo);
          if (!(mass > 0.0)) {
            q = 0.0;
            break;
          }
          q *= mass;
          ++i;
          ++j;
        }
      }
      var += 2.0 * d[k] * d[l] * (q - pp[k] * pp[l]);
    }
  }

  if (var < 0.0) {
    if (var < -kNegVarianceTol)
      throw std::runtime_error("sobol kernel: negative variance beyond tolerance");
    var = 0.0;
  }
  return var;
}

double SobolCache::closed_variance(const IndexSet& set) {
  validate_index_set(set, p_);
  if (set.empty()) return 0.0;
  auto it = closed_.find(set);
  if (it != closed_.end()) return it->second;
  const double var = kernel(set, /*pruned=*/true);
  closed_.emplace(set, var);
  return var;
}

double SobolCache::closed_variance_unpruned(const IndexSet& set) {
  validate_index_set(set, p_);
  if (set.empty()) return 0.0;
  return kernel(set, /*pruned=*/false);
}

double SobolCache::sobol_V(const IndexSet& set) {
  validate_index_set(set, p_);
  if (set.empty()) throw std::invalid_argument("sobol_V: empty index set");
  auto it = partial_.find(set);
  if (it != partial_.end()) return it->second;
  double v = closed_variance(set);
  if (set.size() > 1) {
    const std::size_t m = set.size();
    IndexSet subset;
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << m); ++mask) {
      subset.clear();
      for (std::size_t b = 0; b < m; ++b)
        if (mask & (std::size_t{1} << b)) subset.push_back(set[b]);
      v -= sobol_V(subset);
    }
  }
  partial_.emplace(set, v);
  return v;
}

double SobolCache::total_variance() {
  IndexSet all(p_);
  for (int j = 0; j < p_; ++j) all[j] = j;
  return closed_variance(all);
}

double SobolCache::sobol_S(const IndexSet& set) {
  const double tv = total_variance();
  if (!(tv > 0.0)) return 0.0;
  return sobol_V(set) / tv;
}

double SobolCache::total_effect_V(int dim) {
  if (dim < 0 || dim >= p_) throw std::invalid_argument("total_effect: dimension out of range");
  return total_variance() - closed_variance(complement({dim}, p_));
}

double SobolCache::total_effect(int dim) {
  const double tv = total_variance();
  if (!(tv > 0.0)) return 0.0;
  return 1.0 - closed_variance(complement({dim}, p_)) / tv;
}

std::size_t SobolCache::kernel_terms(const IndexSet& set, bool pruned) const {
  std::size_t n = 0;
  for (const Region& region : regions_) {
    bool survives = !pruned;
    if (pruned) {
      std::size_t s = 0;
      for (int e = region.begin; e < region.end && !survives; ++e) {
        while (s < set.size() && set[s] < entries_[e].dim) ++s;
        if (s < set.size() && set[s] == entries_[e].dim) survives = true;
      }
    }
    n += survives;
  }
  return n * n;
}

double var_cond_expect(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set) {
  SobolCache cache(ens, measure);
  return cache.closed_variance(set);
}

double sobol_V(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set,
               SobolCache& cache) {
  (void)ens;
  (void)measure;
  return cache.sobol_V(set);
}

double total_variance(const Ensemble& ens, const ProductMeasure& measure) {
  SobolCache cache(ens, measure);
  return cache.total_variance();
}

double sobol_S(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set,
               SobolCache& cache) {
  (void)ens;
  (void)measure;
  return cache.sobol_S(set);
}

double total_effect(const Ensemble& ens, const ProductMeasure& measure, int dim,
                    SobolCache& cache) {
  (void)ens;
  (void)measure;
  return cache.total_effect(dim);
}

double SobolReport::second_S(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const PairIndex& pair : second_order)
    if (pair.i == i && pair.j == j) return pair.S;
  throw std::out_of_range("SobolReport: second-order pair not computed");
}

double SobolReport::second_V(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const PairIndex& pair : second_order)
    if (pair.i == i && pair.j == j) return pair.V;
  throw std::out_of_range("SobolReport: second-order pair not computed");
}

SobolReport report(const Ensemble& ens, const ProductMeasure& measure,
                   const ReportOptions& opts) {
  SobolCache cache(ens, measure);
  const int p = ens.dim();
  SobolReport rep;
  rep.dim = p;
  rep.total_variance = cache.total_variance();
  rep.degenerate = cache.degenerate();
  rep.first_order_V.resize(p);
  rep.first_order_S.resize(p);
  rep.total_effect_V.resize(p);
  rep.total_effect_S.resize(p);
  for (int i = 0; i < p; ++i) {
    rep.first_order_V[i] = cache.sobol_V({i});
    rep.first_order_S[i] = cache.sobol_S({i});
    rep.total_effect_V[i] = cache.total_effect_V(i);
    rep.total_effect_S[i] = cache.total_effect(i);
  }
  if (opts.second_order) {
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        rep.second_order.push_back(
            {i, j, cache.sobol_V({i, j}), cache.sobol_S({i, j})});
  }
  return rep;
}

AggregateReport aggregate(std::span<const PosteriorDraw> posterior,
                          const ProductMeasure& measure, const ReportOptions& opts) {
  if (posterior.empty()) throw std::invalid_argument("aggregate: empty posterior");
  AggregateReport agg;
  agg.per_draw.resize(posterior.size());

  const int threads = std::max(1, opts.threads);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      agg.per_draw[k] = report(posterior[k].ensemble, measure, {opts.second_order, 1});
  };
  if (threads == 1 || posterior.size() < 2) {
    work(0, posterior.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (posterior.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(posterior.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // means run over non-degenerate draws, in draw order regardless of
  // how many threads produced the per-draw reports
  const int p = agg.per_draw.front().dim;
  SobolReport& mean = agg.mean;
  mean.dim = p;
  mean.first_order_V.assign(p, 0.0);
  mean.first_order_S.assign(p, 0.0);
  mean.total_effect_V.assign(p, 0.0);
  mean.total_effect_S.assign(p, 0.0);
  const bool pairs = opts.second_order;
  if (pairs)
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) mean.second_order.push_back({i, j, 0.0, 0.0});

  std::size_t used = 0;
  for (const SobolReport& rep : agg.per_draw) {
    if (rep.degenerate) {
      ++agg.degenerate_draws;
      continue;
    }
    ++used;
    mean.total_variance += rep.total_variance;
    for (int i = 0; i < p; ++i) {
      mean.first_order_V[i] += rep.first_order_V[i];
      mean.first_order_S[i] += rep.first_order_S[i];
      mean.total_effect_V[i] += rep.total_effect_V[i];
      mean.total_effect_S[i] += rep.total_effect_S[i];
    }
    if (pairs)
      for (std::size_t k = 0; k < mean.second_order.size(); ++k) {
        mean.second_order[k].V += rep.second_order[k].V;
        mean.second_order[k].S += rep.second_order[k].S;
      }
  }
  if (used == 0) {
    mean.degenerate = true;
    return agg;
  }
  const double inv = 1.0 / static_cast<double>(used);
  mean.total_variance *= inv;
  for (int i = 0; i < p; ++i) {
    mean.first_order_V[i] *= inv;
    mean.first_order_S[i] *= inv;
    mean.total_effect_V[i] *= inv;
    mean.total_effect_S[i] *= inv;
  }
  for (auto& pair : mean.second_order) {
    pair.V *= inv;
    pair.S *= inv;
  }
  return agg;
}

std::map<IndexSet, double> full_decomposition(const Ensemble& ens,
                                              const ProductMeasure& measure, int max_order) {
  const int p = ens.dim();
  if (max_order < 1 || max_order > p)
    throw std::invalid_argument("full_decomposition: max_order must be in 1..p");
  SobolCache cache(ens, measure);
  std::map<IndexSet, double> out;
  std::vector<int> all(p);
  for (int j = 0; j < p; ++j) all[j] = j;
  // enumerate subsets by bitmask; p is small by contract here
  if (p > 25) throw std::invalid_argument("full_decomposition: p too large to enumerate");
  for (std::size_t mask = 1; mask < (std::size_t{1} << p); ++mask) {
    if (std::popcount(mask) > max_order) continue;
    IndexSet set;
    for (int b = 0; b < p; ++b)
      if (mask & (std::size_t{1} << b)) set.push_back(b);
    out.emplace(std::move(set), 0.0);
  }
  for (auto& [set, value] : out) value = cache.sobol_V(set);
  return out;
}

namespace {

std::string set_label(std::span<const int> dims) {
  std::string s;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) s += '+';
    s += std::to_string(dims[k] + 1);
  }
  return s;
}

void write_rows(std::ostream& os, const std::string& draw, const SobolReport& rep) {
  os << draw << ",total," << rep.total_variance << ",,\n";
  for (int i = 0; i < rep.dim; ++i) {
    os << draw << ',' << set_label(std::vector<int>{i}) << ',' << rep.first_order_V[i] << ','
       << rep.first_order_S[i] << ',' << rep.total_effect_S[i] << '\n';
  }
  for (const auto& pair : rep.second_order) {
    os << draw << ',' << set_label(std::vector<int>{pair.i, pair.j}) << ',' << pair.V << ','
       << pair.S << ",\n";
  }
}

}  // namespace

void write_report_csv(std::ostream& os, const SobolReport& rep) {
  os << "draw,set,V,S,T\n";
  write_rows(os, "0", rep);
}

void write_aggregate_csv(std::ostream& os, const AggregateReport& agg) {
  os << "draw,set,V,S,T\n";
  for (std::size_t k = 0; k < agg.per_draw.size(); ++k)
    write_rows(os, std::to_string(k), agg.per_draw[k]);
  write_rows(os, "mean", agg.mean);
}

}  // namespace treesobol
