#ifndef TREESOBOL_ORACLE_HPP
#define TREESOBOL_ORACLE_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "treesobol/domain.hpp"
#include "treesobol/measure.hpp"
#include "treesobol/sobol.hpp"

namespace treesobol {

// Cutpoint-induced grid on which the ensemble is constant cell by cell.
// Verification path: shares no code with the SobolCache kernel (values
// come from ensemble_eval at cell midpoints, masses from the marginal
// cdf on the per-dimension breakpoints).
class GridDecomposition {
 public:
  GridDecomposition(const Ensemble& ens, const ProductMeasure& measure,
                    std::size_t max_cells = 10'000'000);  // throws past the budget

  std::size_t cell_count() const { return values_.size(); }
  const std::vector<std::vector<double>>& breakpoints() const { return breaks_; }

  // visits every cell: multi-index, probability mass, ensemble value
  void for_each_cell(
      const std::function<void(std::span<const int>, double, double)>& fn) const;

  double total_mass() const;  // sums to 1 up to roundoff

 private:
  friend class GridOracle;
  std::vector<std::vector<double>> breaks_;  // per dim, endpoints + cuts
  std::vector<std::vector<double>> probs_;   // per dim, cell masses
  std::vector<double> values_;               // row-major ensemble values
  std::vector<int> sizes_;
};

// Exhaustive-enumeration indices: marginalize the grid values over the
// complement of P, take the discrete variance, then apply the subset
// recursion. Independent of the analytic kernel, used to certify it.
class GridOracle {
 public:
  GridOracle(const Ensemble& ens, const ProductMeasure& measure,
             std::size_t max_cells = 10'000'000);

  double closed_variance(const IndexSet& set);
  double sobol_V(const IndexSet& set);
  double total_variance();

  const GridDecomposition& grid() const { return grid_; }

 private:
  GridDecomposition grid_;
  std::map<IndexSet, double> closed_;
  std::map<IndexSet, double> partial_;
};

double grid_sobol_V(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set,
                    std::size_t max_cells = 10'000'000);

// Pick-freeze Monte Carlo for arbitrary functions on [0,1]^p. Two
// designs A and B share the X_P columns through a hybrid matrix C, and
// mean((f(A) - m)(f(C) - m)) estimates Var(E[f|X_P]); m is the pooled
// mean of f(A), f(B). Deterministic for a fixed seed.
struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

using McFunction = std::function<double(std::span<const double>)>;

McEstimate mc_closed_variance(const McFunction& f, int p, const IndexSet& set,
                              std::size_t n_samples, std::uint64_t seed);
McEstimate mc_total_variance(const McFunction& f, int p, std::size_t n_samples,
                             std::uint64_t seed);
// S_i = Var(E[f|X_i]) / Var(f); the reported standard error is the
// closed-variance error scaled by the variance estimate
McEstimate mc_first_order(const McFunction& f, int p, int dim, std::size_t n_samples,
                          std::uint64_t seed);
McEstimate mc_total_effect(const McFunction& f, int p, int dim, std::size_t n_samples,
                           std::uint64_t seed);

}  // namespace treesobol

#endif  // TREESOBOL_ORACLE_HPP
