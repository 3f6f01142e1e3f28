#include "treesobol/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "treesobol/rng.hpp"

namespace treesobol {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// regularized lower incomplete gamma P(a, x), series + continued fraction
double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

double chi2_cdf(double x, double dof) { return gamma_p(0.5 * dof, 0.5 * x); }

double chi2_quantile(double prob, double dof) {
  if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("chi2_quantile: prob in (0,1)");
  double lo = 0.0, hi = dof + 10.0;
  while (chi2_cdf(hi, dof) < prob) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, dof) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// per-leaf marginal likelihood contribution once the common gaussian
// factor over all observations is stripped
double leaf_lm(double n, double sum_r, double sigma2, double tau2) {
  if (tau2 == 0.0) return 0.0;
  const double k = sigma2 + n * tau2;
  return -0.5 * std::log(k / sigma2) + tau2 * sum_r * sum_r / (2.0 * sigma2 * k);
}

// mutable tree with a free list; root stays at slot 0
struct MNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  int dim = -1;
  int cut = -1;  // index into the per-dimension cutpoint grid
  double mu = 0.0;
  bool is_leaf() const { return left < 0; }
};

struct MTree {
  std::vector<MNode> nodes{MNode{}};
  std::vector<int> free_slots;

  int alloc() {
    if (!free_slots.empty()) {
      const int idx = free_slots.back();
      free_slots.pop_back();
      nodes[idx] = MNode{};
      return idx;
    }
    nodes.push_back(MNode{});
    return static_cast<int>(nodes.size()) - 1;
  }
  void release(int idx) { free_slots.push_back(idx); }
};

struct Sampler {
  const Dataset& data;
  const SamplerConfig& cfg;
  Rng rng;

  int p;
  std::vector<std::vector<double>> grid;  // cutpoint values per dimension
  std::vector<double> yc;                 // centered responses
  double y_mean = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
  double sigma2 = 1.0;

  std::vector<MTree> trees;
  std::vector<std::vector<double>> tree_fit;  // per tree, per observation
  std::vector<double> total_fit;
  std::vector<double> resid;

  // scratch
  std::vector<int> leaf_ids, nog_ids, assign;

  Sampler(const Dataset& d, const SamplerConfig& c)
      : data(d), cfg(c), rng(c.seed), p(static_cast<int>(d.p)) {
    grid.resize(p);
    for (int j = 0; j < p; ++j) {
      grid[j].resize(cfg.cutpoints);
      for (int g = 0; g < cfg.cutpoints; ++g)
        grid[j][g] = static_cast<double>(g + 1) / (cfg.cutpoints + 1);
    }

    for (double v : d.y) y_mean += v;
    y_mean /= static_cast<double>(d.n);
    yc.resize(d.n);
    for (std::size_t i = 0; i < d.n; ++i) yc[i] = d.y[i] - y_mean;

    const auto [lo_it, hi_it] = std::minmax_element(d.y.begin(), d.y.end());
    const double range = *hi_it - *lo_it;
    tau = range > 0.0 ? range / (2.0 * cfg.leaf_prior_k * std::sqrt(cfg.trees)) : 0.0;

    double ss = 0.0;
    for (double v : yc) ss += v * v;
    const double sighat2 = ss / static_cast<double>(d.n - 1);
    lambda = sighat2 > 0.0 ? sighat2 * chi2_quantile(1.0 - cfg.q, cfg.nu) / cfg.nu : 0.0;
    sigma2 = cfg.prior_only ? 1.0 : std::max(sighat2, 1e-12);

    trees.resize(cfg.trees);
    tree_fit.assign(cfg.trees, std::vector<double>(d.n, 0.0));
    total_fit.assign(d.n, 0.0);
    resid.resize(d.n);
  }

  double p_split(int depth) const { return cfg.alpha * std::pow(1.0 + depth, -cfg.beta); }

  int node_depth(const MTree& tree, int idx) const {
    int d = 0;
    while (tree.nodes[idx].parent >= 0) {
      idx = tree.nodes[idx].parent;
      ++d;
    }
    return d;
  }

  // grid-index window (lo, hi] style: [lo, hi) of valid cut indices for
  // dim j at node `idx`, narrowed by the ancestors that split on j
  void avail_range(const MTree& tree, int idx, int j, int& lo, int& hi) const {
    lo = 0;
    hi = cfg.cutpoints;
    int child = idx;
    int node = tree.nodes[idx].parent;
    while (node >= 0) {
      const MNode& a = tree.nodes[node];
      if (a.dim == j) {
        if (tree.nodes[node].left == child)
          hi = std::min(hi, a.cut);
        else
          lo = std::max(lo, a.cut + 1);
      }
      child = node;
      node = a.parent;
    }
  }

  void collect(const MTree& tree, int idx, std::vector<int>& leaves,
               std::vector<int>& nogs) const {
    const MNode& node = tree.nodes[idx];
    if (node.is_leaf()) {
      leaves.push_back(idx);
      return;
    }
    if (tree.nodes[node.left].is_leaf() && tree.nodes[node.right].is_leaf())
      nogs.push_back(idx);
    collect(tree, node.left, leaves, nogs);
    collect(tree, node.right, leaves, nogs);
  }

  int leaf_for(const MTree& tree, std::size_t obs) const {
    int idx = 0;
    while (!tree.nodes[idx].is_leaf()) {
      const MNode& node = tree.nodes[idx];
      idx = (data.x_at(obs, node.dim) < grid[node.dim][node.cut]) ? node.left : node.right;
    }
    return idx;
  }

  bool leaf_has_rule(const MTree& tree, int leaf) const {
    for (int j = 0; j < p; ++j) {
      int lo, hi;
      avail_range(tree, leaf, j, lo, hi);
      if (lo < hi) return true;
    }
    return false;
  }

  int count_good_leaves(const MTree& tree, const std::vector<int>& leaves) const {
    int n = 0;
    for (int leaf : leaves) n += leaf_has_rule(tree, leaf);
    return n;
  }

  double birth_prob(const MTree& tree, bool stump, int n_good) const {
    if (n_good == 0) return 0.0;
    (void)tree;
    return stump ? 1.0 : 0.5;
  }

  // one birth/death Metropolis-Hastings step against the residuals
  void tree_move(MTree& tree) {
    leaf_ids.clear();
    nog_ids.clear();
    collect(tree, 0, leaf_ids, nog_ids);
    const bool stump = tree.nodes[0].is_leaf();
    const int n_good = count_good_leaves(tree, leaf_ids);
    const double pb = birth_prob(tree, stump, n_good);
    if (pb == 0.0 && nog_ids.empty()) return;

    if (rng.uniform() < pb)
      birth_move(tree, n_good);
    else if (!nog_ids.empty())
      death_move(tree, n_good, stump);
  }

  void birth_move(MTree& tree, int n_good) {
    // propose uniformly among leaves that admit a rule
    std::vector<int> good;
    for (int leaf : leaf_ids)
      if (leaf_has_rule(tree, leaf)) good.push_back(leaf);
    const int leaf = good[rng.uniform_int(good.size())];

    std::vector<int> dims;
    for (int j = 0; j < p; ++j) {
      int lo, hi;
      avail_range(tree, leaf, j, lo, hi);
      if (lo < hi) dims.push_back(j);
    }
    const int dim = dims[rng.uniform_int(dims.size())];
    int lo, hi;
    avail_range(tree, leaf, dim, lo, hi);
    const int cut = lo + static_cast<int>(rng.uniform_int(hi - lo));

    double n_l = 0.0, n_r = 0.0, s_l = 0.0, s_r = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      if (leaf_for(tree, i) != leaf) continue;
      if (data.x_at(i, dim) < grid[dim][cut]) {
        n_l += 1.0;
        s_l += resid[i];
      } else {
        n_r += 1.0;
        s_r += resid[i];
      }
    }
    if (!cfg.prior_only && (n_l == 0.0 || n_r == 0.0)) return;  // invalid proposal

    const int depth = node_depth(tree, leaf);
    const double ps = p_split(depth);
    const double ps_child = p_split(depth + 1);
    const double log_prior =
        std::log(ps) + 2.0 * std::log(1.0 - ps_child) - std::log(1.0 - ps);

    const bool stump = tree.nodes[0].is_leaf();
    const double pb_old = birth_prob(tree, stump, n_good);
    // after the birth the tree surely has an internal node and the new
    // leaves keep at least the sibling side of the split available
    const double pd_new = 0.5;
    const int n_nog_new = count_nogs_after_birth(tree, leaf);
    const double log_proposal = std::log(pd_new) - std::log(n_nog_new) -
                                std::log(pb_old) + std::log(n_good);

    double log_lik = 0.0;
    if (!cfg.prior_only)
      log_lik = leaf_lm(n_l, s_l, sigma2, tau * tau) + leaf_lm(n_r, s_r, sigma2, tau * tau) -
                leaf_lm(n_l + n_r, s_l + s_r, sigma2, tau * tau);

    const double log_alpha = log_prior + log_proposal + log_lik;
    if (std::log(1.0 - rng.uniform()) < log_alpha) {
      const int left = tree.alloc();
      const int right = tree.alloc();
      MNode& parent = tree.nodes[leaf];
      parent.left = left;
      parent.right = right;
      parent.dim = dim;
      parent.cut = cut;
      tree.nodes[left].parent = leaf;
      tree.nodes[right].parent = leaf;
    }
  }

  int count_nogs_after_birth(const MTree& tree, int leaf) const {
    // birthing at `leaf` adds one nog (the leaf itself) and removes its
    // parent from the nog set when the sibling is a leaf
    int n = static_cast<int>(nog_ids.size()) + 1;
    const int parent = tree.nodes[leaf].parent;
    if (parent >= 0) {
      const MNode& par = tree.nodes[parent];
      const int sibling = (par.left == leaf) ? par.right : par.left;
      if (tree.nodes[sibling].is_leaf()) --n;
    }
    return n;
  }

  void death_move(MTree& tree, int n_good, bool stump) {
    (void)stump;
    const int nog = nog_ids[static_cast<int>(rng.uniform_int(nog_ids.size()))];
    const MNode& node = tree.nodes[nog];

    double n_l = 0.0, n_r = 0.0, s_l = 0.0, s_r = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      const int leaf = leaf_for(tree, i);
      if (leaf == node.left) {
        n_l += 1.0;
        s_l += resid[i];
      } else if (leaf == node.right) {
        n_r += 1.0;
        s_r += resid[i];
      }
    }

    const int depth = node_depth(tree, nog);
    const double ps = p_split(depth);
    const double ps_child = p_split(depth + 1);
    const double log_prior =
        std::log(ps) + 2.0 * std::log(1.0 - ps_child) - std::log(1.0 - ps);

    // reverse move: birth at the merged leaf inside the shrunken tree
    const bool new_stump = (nog == 0);
    const double pb_new = new_stump ? 1.0 : 0.5;
    const int n_good_new = n_good_after_death(tree, nog);
    const double pd_old = 1.0 - birth_prob(tree, tree.nodes[0].is_leaf(), n_good);
    const double log_proposal = std::log(pb_new) - std::log(n_good_new) -
                                std::log(pd_old) + std::log(nog_ids.size());

    double log_lik = 0.0;
    if (!cfg.prior_only)
      log_lik = leaf_lm(n_l + n_r, s_l + s_r, sigma2, tau * tau) -
                leaf_lm(n_l, s_l, sigma2, tau * tau) - leaf_lm(n_r, s_r, sigma2, tau * tau);

    const double log_alpha = -log_prior + log_proposal + log_lik;
    if (std::log(1.0 - rng.uniform()) < log_alpha) {
      MNode& merged = tree.nodes[nog];
      tree.release(merged.left);
      tree.release(merged.right);
      merged.left = merged.right = -1;
      merged.dim = -1;
      merged.cut = -1;
      merged.mu = 0.0;
    }
  }

  int n_good_after_death(const MTree& tree, int nog) const {
    // the merged leaf always admits a rule (its own former cut is valid)
    int n = 1;
    for (int leaf : leaf_ids) {
      const int parent = tree.nodes[leaf].parent;
      if (parent == nog) continue;  // child of the dying split
      n += leaf_has_rule(tree, leaf);
    }
    return n;
  }

  void draw_leaf_values(MTree& tree) {
    leaf_ids.clear();
    nog_ids.clear();
    collect(tree, 0, leaf_ids, nog_ids);
    const double tau2 = tau * tau;

    std::vector<double> count(leaf_ids.size(), 0.0), sum(leaf_ids.size(), 0.0);
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t k = 0; k < leaf_ids.size(); ++k) slot[leaf_ids[k]] = static_cast<int>(k);
    if (!cfg.prior_only) {
      for (std::size_t i = 0; i < data.n; ++i) {
        const int k = slot[leaf_for(tree, i)];
        count[k] += 1.0;
        sum[k] += resid[i];
      }
    }

    for (std::size_t k = 0; k < leaf_ids.size(); ++k) {
      MNode& leaf = tree.nodes[leaf_ids[k]];
      if (tau2 == 0.0) {
        leaf.mu = 0.0;
      } else if (cfg.prior_only) {
        leaf.mu = rng.normal(0.0, tau);
      } else {
        const double prec = count[k] / sigma2 + 1.0 / tau2;
        const double mean = (sum[k] / sigma2) / prec;
        leaf.mu = rng.normal(mean, std::sqrt(1.0 / prec));
      }
    }
  }

  void update_tree(int t) {
    MTree& tree = trees[t];
    for (std::size_t i = 0; i < data.n; ++i)
      resid[i] = yc[i] - total_fit[i] + tree_fit[t][i];

    tree_move(tree);
    draw_leaf_values(tree);

    for (std::size_t i = 0; i < data.n; ++i) {
      const double value = tree.nodes[leaf_for(tree, i)].mu;
      total_fit[i] += value - tree_fit[t][i];
      tree_fit[t][i] = value;
    }
  }

  void draw_sigma() {
    double sse = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      const double e = yc[i] - total_fit[i];
      sse += e * e;
    }
    const double dof = cfg.nu + static_cast<double>(data.n);
    sigma2 = std::max((cfg.nu * lambda + sse) / rng.chi_square(dof), 1e-20);
  }

  Tree export_tree(const MTree& tree, double shift) const {
    Tree out;
    append_node(tree, 0, shift, out);
    return out;
  }

  int append_node(const MTree& tree, int idx, double shift, Tree& out) const {
    const MNode& node = tree.nodes[idx];
    const int at = static_cast<int>(out.nodes.size());
    out.nodes.push_back(TreeNode{});
    if (node.is_leaf()) {
      out.nodes[at].leaf = node.mu + shift;
      return at;
    }
    out.nodes[at].split = SplitRule{node.dim, grid[node.dim][node.cut]};
    const int left = append_node(tree, node.left, shift, out);
    const int right = append_node(tree, node.right, shift, out);
    out.nodes[at].left = left;
    out.nodes[at].right = right;
    return at;
  }

  std::vector<PosteriorDraw> run() {
    std::vector<PosteriorDraw> draws;
    draws.reserve(cfg.draws);
    const Domain domain = Domain::unit_cube(p);
    const double shift = y_mean / cfg.trees;  // undo the centering per tree
    for (int it = 0; it < cfg.burn + cfg.draws; ++it) {
      for (int t = 0; t < cfg.trees; ++t) update_tree(t);
      if (!cfg.prior_only) draw_sigma();
      if (it >= cfg.burn) {
        PosteriorDraw draw;
        draw.ensemble.domain = domain;
        draw.ensemble.trees.reserve(cfg.trees);
        for (int t = 0; t < cfg.trees; ++t)
          draw.ensemble.trees.push_back(export_tree(trees[t], shift));
        draw.sigma = std::sqrt(sigma2);
        draws.push_back(std::move(draw));
      }
    }
    return draws;
  }
};

}  // namespace

void validate_dataset(const Dataset& data) {
  if (data.n < 2) throw std::invalid_argument("dataset: need at least two observations");
  if (data.p < 1) throw std::invalid_argument("dataset: need at least one input");
  if (data.x.size() != data.n * data.p || data.y.size() != data.n)
    throw std::invalid_argument("dataset: inconsistent array sizes");
  for (double v : data.y)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite response");
  for (double v : data.x)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("dataset: inputs must lie in [0,1]");
}

void validate_config(const SamplerConfig& cfg) {
  if (cfg.trees < 1) throw std::invalid_argument("config: trees must be >= 1");
  if (cfg.draws < 1) throw std::invalid_argument("config: draws must be >= 1");
  if (cfg.burn < 0) throw std::invalid_argument("config: burn must be >= 0");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("config: alpha must be in (0,1)");
  if (cfg.beta < 0.0) throw std::invalid_argument("config: beta must be >= 0");
  if (!(cfg.leaf_prior_k > 0.0)) throw std::invalid_argument("config: k must be positive");
  if (!(cfg.nu > 0.0)) throw std::invalid_argument("config: nu must be positive");
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) throw std::invalid_argument("config: q must be in (0,1)");
  if (cfg.cutpoints < 2) throw std::invalid_argument("config: cutpoint grid must be >= 2");
}

std::vector<PosteriorDraw> fit(const Dataset& data, const SamplerConfig& cfg) {
  validate_dataset(data);
  validate_config(cfg);
  Sampler sampler(data, cfg);
  return sampler.run();
}

double log_marginal_likelihood(const Tree& tree, const Dataset& data,
                               std::span<const double> residuals, double sigma,
                               double leaf_sd) {
  validate_dataset(data);
  if (residuals.size() != data.n)
    throw std::invalid_argument("log_marginal_likelihood: residual length mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("log_marginal_likelihood: sigma > 0");
  if (leaf_sd < 0.0) throw std::invalid_argument("log_marginal_likelihood: leaf_sd >= 0");

  // leaf sufficient statistics via the traversal convention
  std::vector<double> count(tree.nodes.size(), 0.0), sum(tree.nodes.size(), 0.0);
  double sum_sq = 0.0;
  std::vector<double> point(data.p);
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.p; ++j) point[j] = data.x_at(i, j);
    int idx = 0;
    while (!tree.nodes[idx].is_leaf()) {
      const TreeNode& node = tree.nodes[idx];
      idx = (point[node.split.dim] < node.split.cut) ? node.left : node.right;
    }
    count[idx] += 1.0;
    sum[idx] += residuals[i];
    sum_sq += residuals[i] * residuals[i];
  }

  const double sigma2 = sigma * sigma;
  const double tau2 = leaf_sd * leaf_sd;
  double lm = -0.5 * static_cast<double>(data.n) *
                  std::log(2.0 * 3.141592653589793238462643383279 * sigma2) -
              sum_sq / (2.0 * sigma2);
  for (std::size_t idx = 0; idx < tree.nodes.size(); ++idx) {
    if (!tree.nodes[idx].is_leaf()) continue;
    if (count[idx] == 0.0) return kNegInf;  // empty leaf: auto-reject signal
    lm += leaf_lm(count[idx], sum[idx], sigma2, tau2);
  }
  return lm;
}

}  // namespace treesobol
