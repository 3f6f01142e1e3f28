#ifndef TREESOBOL_MEASURE_HPP
#define TREESOBOL_MEASURE_HPP

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "treesobol/domain.hpp"

namespace treesobol {

// One continuous marginal distribution. Interval probabilities are
// cdf differences, so adding a new marginal kind (truncated normal,
// beta, ...) needs only this contract; the index engine is untouched.
class Marginal {
 public:
  virtual ~Marginal() = default;
  virtual double cdf(double x) const = 0;
  virtual double lo() const = 0;
  virtual double hi() const = 0;
};

class UniformMarginal final : public Marginal {
 public:
  UniformMarginal(double lo, double hi);
  double cdf(double x) const override;
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }

 private:
  double lo_, hi_;
};

// Independent product measure over a domain. Each marginal's support
// must equal the corresponding domain margin exactly (its density is
// positive a.e. on the margin, and nowhere else).
class ProductMeasure {
 public:
  ProductMeasure(const Domain& domain,
                 std::vector<std::shared_ptr<const Marginal>> marginals);

  static ProductMeasure uniform(const Domain& domain);

  int dim() const { return static_cast<int>(marginals_.size()); }
  const Marginal& marginal(int dim) const { return *marginals_[dim]; }

  // mass of iv under marginal `dim`; throws if iv is not inside the support
  double interval_prob(int dim, const Interval& iv) const;

  // product over dims[k] of interval_prob(dims[k], projected[k]);
  // the empty index set yields 1
  double box_prob(std::span<const int> dims, std::span<const Interval> projected) const;

 private:
  std::vector<std::shared_ptr<const Marginal>> marginals_;
};

// [max(lo), min(hi)) with the closed-top flag carried through; empty
// (nullopt) when max(lo) >= min(hi).
std::optional<Interval> interval_intersect(const Interval& a, const Interval& b);

}  // namespace treesobol

#endif  // TREESOBOL_MEASURE_HPP
