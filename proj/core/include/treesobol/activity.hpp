#ifndef TREESOBOL_ACTIVITY_HPP
#define TREESOBOL_ACTIVITY_HPP

#include <iosfwd>
#include <vector>

#include "treesobol/domain.hpp"
#include "treesobol/measure.hpp"

namespace treesobol {

// Split counts per dimension, duplicates included: the classic
// variable-activity heuristic.
std::vector<long> one_way_counts(const Ensemble& ens);

// Number of distinct (dim, cut) rules per dimension across the ensemble.
std::vector<long> unique_rule_counts(const Ensemble& ens);

// Piecewise-constant function of one input: K = breakpoints.size() - 1
// cells, each half-open except the last (closed at the margin top).
struct PiecewiseConstant1D {
  int dim = 0;
  std::vector<double> breakpoints;  // strictly increasing, spans the margin
  std::vector<double> values;       // one per cell

  int cell_count() const { return static_cast<int>(values.size()); }
  double value_at(double x) const;
  // measure-weighted variance of the function on its margin
  double variance(const ProductMeasure& measure) const;
};

// E[E(X) | X_i = .]: breakpoints are the margin endpoints plus the
// unique cutpoints on dim i; every terminal node contributes its
// conditional-expectation coefficient to the cells its interval covers,
// so nodes that never split on i shift all cells by the same constant
// and the result is the full conditional expectation.
PiecewiseConstant1D cond_expect_1d(const Ensemble& ens, const ProductMeasure& measure, int dim);

// Adjacent cell pairs whose values differ by more than tol.
int jump_count(const PiecewiseConstant1D& f, double tol = 1e-12);

// Center/scale the levels so their corrected sample variance equals the
// cell count, and assign every cell equal probability mass. Requires at
// least two cells and pairwise-distinct levels. The variance of the
// result under the equal-mass measure equals the jump count.
struct Standardized {
  PiecewiseConstant1D fn;  // equal-width cells on the original margin
  double cell_mass = 0.0;  // 1 / cell_count
};

Standardized standardize(const PiecewiseConstant1D& f);

// variance under equal cell masses (the standardized measure)
double equal_mass_variance(const PiecewiseConstant1D& f);

// CSV with columns draw,dim,count,unique_count,S for the count-versus-
// index comparison data; dims print 1-based.
void write_count_index_csv(std::ostream& os,
                           const std::vector<std::vector<long>>& per_draw_counts,
                           const std::vector<std::vector<long>>& per_draw_unique,
                           const std::vector<std::vector<double>>& per_draw_S);

}  // namespace treesobol

#endif  // TREESOBOL_ACTIVITY_HPP
