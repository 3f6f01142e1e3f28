#ifndef TREESOBOL_DOMAIN_HPP
#define TREESOBOL_DOMAIN_HPP

#include <span>
#include <string>
#include <vector>

namespace treesobol {

// One marginal interval of an axis-aligned box. Intervals are half-open
// [lo, hi) except at the top of a domain margin, where they are closed
// [lo, hi]. This convention removes every point-on-boundary ambiguity:
// a point sitting exactly on a cutpoint belongs to the right-hand region.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_hi = false;

  bool contains(double x) const {
    return x >= lo && (x < hi || (closed_hi && x == hi));
  }
  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Bounded hyperrectangle input domain, margins [lo[j], hi[j]].
struct Domain {
  std::vector<double> lo;
  std::vector<double> hi;

  Domain() = default;
  Domain(std::vector<double> lo_, std::vector<double> hi_);

  static Domain unit_cube(int p);

  int dim() const { return static_cast<int>(lo.size()); }
  Interval margin(int j) const { return Interval{lo[j], hi[j], true}; }
  bool contains(std::span<const double> x) const;
  bool operator==(const Domain&) const = default;
};

// Boolean split rule "x_dim < cut"; dims are 0-based internally.
struct SplitRule {
  int dim = -1;
  double cut = 0.0;
  bool operator==(const SplitRule&) const = default;
};

// Binary regression tree stored as a flat node array, root at index 0.
// A node is a leaf iff left < 0; internal nodes have both children.
struct TreeNode {
  int left = -1;
  int right = -1;
  SplitRule split;
  double leaf = 0.0;

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  static Tree stump(double mu) { return Tree{{TreeNode{-1, -1, {}, mu}}}; }
  int leaf_count() const;
  // structural equality: same topology, rules, and leaf values; the
  // node-array layout is an implementation detail
  bool operator==(const Tree& other) const;
};

// Additive ensemble of trees over a shared domain.
struct Ensemble {
  Domain domain;
  std::vector<Tree> trees;

  int dim() const { return domain.dim(); }
  bool operator==(const Ensemble&) const = default;
};

// One posterior sample: an ensemble plus its error standard deviation.
struct PosteriorDraw {
  Ensemble ensemble;
  double sigma = 0.0;
};

// Terminal-node box with its leaf value and the set of dimensions split
// on along the root-to-leaf path (sorted, deduplicated).
struct TerminalRegion {
  std::vector<Interval> box;
  double mu = 0.0;
  std::vector<int> split_dims;

  bool contains(std::span<const double> x) const;
};

// Throws std::invalid_argument when a structural invariant is violated:
// bad child indices, unreachable/shared nodes, split dimension out of
// range, or a cutpoint outside the open interior of its node's box.
void validate_tree(const Tree& tree, const Domain& domain);
void validate_ensemble(const Ensemble& ens);

// Boxes of all leaves; they partition the domain. One region per leaf,
// in depth-first (left first) order.
std::vector<TerminalRegion> terminal_regions(const Tree& tree, const Domain& domain);

double tree_eval(const Tree& tree, std::span<const double> x);

// Sum of the per-tree leaf values reached by "x_dim < cut goes left".
// Throws std::invalid_argument for points outside the (closed) domain.
double ensemble_eval(const Ensemble& ens, std::span<const double> x);

// Strictly increasing, deduplicated cutpoints used on `dim` anywhere in
// the ensemble. Deduplication is exact bitwise equality.
std::vector<double> unique_cutpoints(const Ensemble& ens, int dim);

}  // namespace treesobol

#endif  // TREESOBOL_DOMAIN_HPP
