#ifndef TREESOBOL_SOBOL_HPP
#define TREESOBOL_SOBOL_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "treesobol/domain.hpp"
#include "treesobol/measure.hpp"

namespace treesobol {

// Variable index set P, sorted and deduplicated, 0-based.
using IndexSet = std::vector<int>;

IndexSet make_index_set(std::vector<int> dims);
void validate_index_set(const IndexSet& set, int p);
IndexSet complement(const IndexSet& set, int p);

// One summand of the conditional expectation E[E(X) | X_P]:
// coefficient d_k = mu_k * prod_{j not in P} P_j(I_k^j) on the box
// projection of terminal region k onto the dims in P (in P order).
struct CondExpectTerm {
  double coeff = 0.0;
  std::vector<Interval> box;
};

// Terms for the terminal nodes surviving the prune: nodes whose
// root-to-leaf path never splits on a dim in P contribute a constant
// and are dropped. With P = all dims every coefficient is exactly mu_k.
std::vector<CondExpectTerm> cond_expect_coeffs(const Ensemble& ens,
                                               const ProductMeasure& measure,
                                               const IndexSet& set);

// Exact variance kernel over one (ensemble, measure) pair with
// memoized per-set results. Not thread-safe; use one cache per thread.
class SobolCache {
 public:
  SobolCache(const Ensemble& ens, const ProductMeasure& measure);

  // Var(E[E(X) | X_P]) as the double sum over surviving terminal-node
  // pairs of d_k d_l (P(R_k^P ∩ R_l^P) − P(R_k^P) P(R_l^P)). A result
  // within -1e-12 of zero is clamped to 0; anything more negative
  // signals a kernel bug and throws.
  double closed_variance(const IndexSet& set);

  // same sum without the prune; agrees with closed_variance bitwise
  double closed_variance_unpruned(const IndexSet& set);

  // V_P = closed_variance(P) − sum of V_Q over nonempty proper subsets
  double sobol_V(const IndexSet& set);

  double total_variance();
  bool degenerate() { return !(total_variance() > 0.0); }

  double sobol_S(const IndexSet& set);

  // T_i = 1 − Var(E[E|X_{-i}]) / Var(E); one kernel call, not 2^(p-1)
  double total_effect(int dim);
  double total_effect_V(int dim);

  // number of kernel summands (surviving nodes squared) for a set
  std::size_t kernel_terms(const IndexSet& set, bool pruned = true) const;

  int dim() const { return p_; }

 private:
  struct Entry {
    int dim;
    double prob;
    double cdf_lo, cdf_hi;
  };
  struct Region {
    double mu;
    int begin, end;  // entry range, ascending dim
  };

  double kernel(const IndexSet& set, bool pruned);

  int p_;
  std::vector<Region> regions_;
  std::vector<Entry> entries_;
  std::map<IndexSet, double> closed_;
  std::map<IndexSet, double> partial_;
};

// One-shot wrappers around a throwaway cache.
double var_cond_expect(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set);
double sobol_V(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set,
               SobolCache& cache);
double total_variance(const Ensemble& ens, const ProductMeasure& measure);
double sobol_S(const Ensemble& ens, const ProductMeasure& measure, const IndexSet& set,
               SobolCache& cache);
double total_effect(const Ensemble& ens, const ProductMeasure& measure, int dim,
                    SobolCache& cache);

struct SobolReport {
  int dim = 0;
  double total_variance = 0.0;
  // a zero-variance (constant) ensemble: unnormalized values are kept,
  // every normalized index is reported as 0
  bool degenerate = false;
  std::vector<double> first_order_V;
  std::vector<double> first_order_S;
  std::vector<double> total_effect_V;
  std::vector<double> total_effect_S;
  struct PairIndex {
    int i, j;
    double V, S;
  };
  std::vector<PairIndex> second_order;  // lexicographic i<j when computed

  double second_S(int i, int j) const;
  double second_V(int i, int j) const;
};

struct ReportOptions {
  bool second_order = true;
  int threads = 1;  // used by aggregate()
};

SobolReport report(const Ensemble& ens, const ProductMeasure& measure,
                   const ReportOptions& opts = {});

// Posterior point estimates: each draw is normalized by its own total
// variance, then indices are averaged across draws. Zero-variance draws
// are excluded from the averages and counted.
struct AggregateReport {
  SobolReport mean;
  std::vector<SobolReport> per_draw;
  int degenerate_draws = 0;
};

AggregateReport aggregate(std::span<const PosteriorDraw> posterior,
                          const ProductMeasure& measure, const ReportOptions& opts = {});

// V_P for every nonempty P with |P| <= max_order (2^p growth is the
// caller's choice).
std::map<IndexSet, double> full_decomposition(const Ensemble& ens,
                                              const ProductMeasure& measure, int max_order);

// CSV with columns draw,set,V,S,T. Sets print 1-based as "1" or "1+2";
// the per-report total variance appears as set "total". Aggregate rows
// use draw = "mean".
void write_report_csv(std::ostream& os, const SobolReport& rep);
void write_aggregate_csv(std::ostream& os, const AggregateReport& agg);

}  // namespace treesobol

#endif  // TREESOBOL_SOBOL_HPP
