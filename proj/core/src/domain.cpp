#include "treesobol/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace treesobol {

Domain::Domain(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("Domain: lo/hi must be nonempty and equal length");
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j]))
      throw std::invalid_argument("Domain: lo[" + std::to_string(j) +
                                  "] must be strictly below hi[" + std::to_string(j) + "]");
  }
}

Domain Domain::unit_cube(int p) {
  if (p < 1) throw std::invalid_argument("Domain: p must be >= 1");
  return Domain(std::vector<double>(p, 0.0), std::vector<double>(p, 1.0));
}

bool Domain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int j = 0; j < dim(); ++j)
    if (x[j] < lo[j] || x[j] > hi[j]) return false;
  return true;
}

int Tree::leaf_count() const {
  int n = 0;
  for (const auto& node : nodes) n += node.is_leaf();
  return n;
}

namespace {

bool same_subtree(const Tree& a, int ia, const Tree& b, int ib) {
  const TreeNode& na = a.nodes[ia];
  const TreeNode& nb = b.nodes[ib];
  if (na.is_leaf() != nb.is_leaf()) return false;
  if (na.is_leaf()) return na.leaf == nb.leaf;
  return na.split == nb.split && same_subtree(a, na.left, b, nb.left) &&
         same_subtree(a, na.right, b, nb.right);
}

}  // namespace

bool Tree::operator==(const Tree& other) const {
  if (nodes.empty() || other.nodes.empty()) return nodes.empty() && other.nodes.empty();
  return same_subtree(*this, 0, other, 0);
}

bool TerminalRegion::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < box.size(); ++j)
    if (!box[j].contains(x[j])) return false;
  return true;
}

namespace {

void validate_node(const Tree& tree, const Domain& domain, int idx,
                   std::vector<double>& lo, std::vector<double>& hi,
                   std::vector<char>& seen) {
  if (idx < 0 || idx >= static_cast<int>(tree.nodes.size()))
    throw std::invalid_argument("tree: child index out of range");
  if (seen[idx]) throw std::invalid_argument("tree: node reachable twice (not a tree)");
  seen[idx] = 1;
  const TreeNode& node = tree.nodes[idx];
  if (node.is_leaf()) {
    if (node.right >= 0) throw std::invalid_argument("tree: unary node");
    if (!std::isfinite(node.leaf)) throw std::invalid_argument("tree: non-finite leaf value");
    return;
  }
  if (node.right < 0) throw std::invalid_argument("tree: unary node");
  const auto& rule = node.split;
  if (rule.dim < 0 || rule.dim >= domain.dim())
    throw std::invalid_argument("tree: dimension mismatch in split rule");
  if (!(rule.cut > lo[rule.dim] && rule.cut < hi[rule.dim]))
    throw std::invalid_argument("tree: degenerate split (cutpoint outside node box)");

  const double save_hi = hi[rule.dim];
  hi[rule.dim] = rule.cut;
  validate_node(tree, domain, node.left, lo, hi, seen);
  hi[rule.dim] = save_hi;

  const double save_lo = lo[rule.dim];
  lo[rule.dim] = rule.cut;
  validate_node(tree, domain, node.right, lo, hi, seen);
  lo[rule.dim] = save_lo;
}

void collect_regions(const Tree& tree, const Domain& domain, int idx,
                     std::vector<Interval>& box, std::set<int>& path_dims,
                     std::vector<TerminalRegion>& out) {
  const TreeNode& node = tree.nodes[idx];
  if (node.is_leaf()) {
    TerminalRegion region;
    region.box = box;
    region.mu = node.leaf;
    region.split_dims.assign(path_dims.begin(), path_dims.end());
    out.push_back(std::move(region));
    return;
  }
  const int d = node.split.dim;
  const double cut = node.split.cut;
  if (!(cut > box[d].lo && cut < box[d].hi))
    throw std::invalid_argument("terminal_regions: degenerate split (cutpoint outside node box)");
  const bool inserted = path_dims.insert(d).second;
  const Interval save = box[d];

  box[d] = Interval{save.lo, cut, false};
  collect_regions(tree, domain, node.left, box, path_dims, out);

  box[d] = Interval{cut, save.hi, save.closed_hi};
  collect_regions(tree, domain, node.right, box, path_dims, out);

  box[d] = save;
  if (inserted) path_dims.erase(d);
}

}  // namespace

void validate_tree(const Tree& tree, const Domain& domain) {
  if (tree.nodes.empty()) throw std::invalid_argument("tree: empty node list");
  std::vector<double> lo = domain.lo, hi = domain.hi;
  std::vector<char> seen(tree.nodes.size(), 0);
  validate_node(tree, domain, 0, lo, hi, seen);
}

void validate_ensemble(const Ensemble& ens) {
  if (ens.domain.dim() < 1) throw std::invalid_argument("ensemble: empty domain");
  if (ens.trees.empty()) throw std::invalid_argument("ensemble: must hold at least one tree");
  for (const Tree& tree : ens.trees) validate_tree(tree, ens.domain);
}

std::vector<TerminalRegion> terminal_regions(const Tree& tree, const Domain& domain) {
  if (tree.nodes.empty()) throw std::invalid_argument("terminal_regions: empty tree");
  std::vector<Interval> box(domain.dim());
  for (int j = 0; j < domain.dim(); ++j) box[j] = domain.margin(j);
  std::set<int> path_dims;
  std::vector<TerminalRegion> out;
  collect_regions(tree, domain, 0, box, path_dims, out);
  return out;
}

double tree_eval(const Tree& tree, std::span<const double> x) {
  int idx = 0;
  while (!tree.nodes[idx].is_leaf()) {
    const TreeNode& node = tree.nodes[idx];
    idx = (x[node.split.dim] < node.split.cut) ? node.left : node.right;
  }
  return tree.nodes[idx].leaf;
}

double ensemble_eval(const Ensemble& ens, std::span<const double> x) {
  if (!ens.domain.contains(x))
    throw std::invalid_argument("ensemble_eval: point outside domain");
  double sum = 0.0;
  for (const Tree& tree : ens.trees) sum += tree_eval(tree, x);
  return sum;
}

std::vector<double> unique_cutpoints(const Ensemble& ens, int dim) {
  if (dim < 0 || dim >= ens.dim())
    throw std::invalid_argument("unique_cutpoints: dimension out of range");
  std::set<double> cuts;
  for (const Tree& tree : ens.trees)
    for (const TreeNode& node : tree.nodes)
      if (!node.is_leaf() && node.split.dim == dim) cuts.insert(node.split.cut);
  return {cuts.begin(), cuts.end()};
}

}  // namespace treesobol
