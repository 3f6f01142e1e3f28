#include "treesobol/measure.hpp"

#include <stdexcept>

namespace treesobol {

UniformMarginal::UniformMarginal(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo < hi)) throw std::invalid_argument("UniformMarginal: lo must be below hi");
}

double UniformMarginal::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return (x - lo_) / (hi_ - lo_);
}

ProductMeasure::ProductMeasure(const Domain& domain,
                               std::vector<std::shared_ptr<const Marginal>> marginals)
    : marginals_(std::move(marginals)) {
  if (static_cast<int>(marginals_.size()) != domain.dim())
    throw std::invalid_argument("ProductMeasure: one marginal per domain dimension");
  for (int j = 0; j < domain.dim(); ++j) {
    if (!marginals_[j]) throw std::invalid_argument("ProductMeasure: null marginal");
    if (marginals_[j]->lo() != domain.lo[j] || marginals_[j]->hi() != domain.hi[j])
      throw std::invalid_argument(
          "ProductMeasure: marginal support must equal the domain margin exactly");
  }
}

ProductMeasure ProductMeasure::uniform(const Domain& domain) {
  std::vector<std::shared_ptr<const Marginal>> ms;
  ms.reserve(domain.dim());
  for (int j = 0; j < domain.dim(); ++j)
    ms.push_back(std::make_shared<UniformMarginal>(domain.lo[j], domain.hi[j]));
  return ProductMeasure(domain, std::move(ms));
}

double ProductMeasure::interval_prob(int dim, const Interval& iv) const {
  if (dim < 0 || dim >= this->dim())
    throw std::invalid_argument("interval_prob: dimension out of range");
  const Marginal& m = *marginals_[dim];
  if (iv.lo < m.lo() || iv.hi > m.hi())
    throw std::invalid_argument("interval_prob: interval outside marginal support");
  if (iv.lo >= iv.hi) return 0.0;
  return m.cdf(iv.hi) - m.cdf(iv.lo);
}

double ProductMeasure::box_prob(std::span<const int> dims,
                                std::span<const Interval> projected) const {
  if (dims.size() != projected.size())
    throw std::invalid_argument("box_prob: dims/projection size mismatch");
  double p = 1.0;
  for (std::size_t k = 0; k < dims.size(); ++k) p *= interval_prob(dims[k], projected[k]);
  return p;
}

std::optional<Interval> interval_intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo, b.lo);
  double hi;
  bool closed;
  if (a.hi < b.hi) {
    hi = a.hi;
    closed = a.closed_hi;
  } else if (b.hi < a.hi) {
    hi = b.hi;
    closed = b.closed_hi;
  } else {
    hi = a.hi;
    closed = a.closed_hi && b.closed_hi;
  }
  if (lo >= hi) return std::nullopt;
  return Interval{lo, hi, closed};
}

}  // namespace treesobol
