#ifndef TREESOBOL_SAMPLER_HPP
#define TREESOBOL_SAMPLER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "treesobol/domain.hpp"

namespace treesobol {

// Regression data on the unit hypercube.
struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;  // row-major n*p, every entry in [0,1]
  std::vector<double> y;

  double x_at(std::size_t i, std::size_t j) const { return x[i * p + j]; }
};

void validate_dataset(const Dataset& data);

// Sum-of-trees sampler settings. Defaults follow the usual automatic
// calibration: depth prior alpha (1+d)^-beta, leaf prior sd
// (max y - min y) / (2 k sqrt(m)), error prior nu * lambda / chisq_nu
// with lambda picked so the sd-of-y overestimate sits at quantile q.
struct SamplerConfig {
  int trees = 200;
  int draws = 1000;
  int burn = 100;
  double alpha = 0.95;
  double beta = 2.0;
  double leaf_prior_k = 2.0;
  double nu = 3.0;
  double q = 0.90;
  int cutpoints = 100;  // equispaced interior grid points per dimension
  std::uint64_t seed = 0;
  bool prior_only = false;  // drop the likelihood from tree moves (test hook)
};

void validate_config(const SamplerConfig& cfg);

// Backfitting Gibbs sampler: per tree, a birth/death Metropolis-Hastings
// step on the marginal likelihood of that tree's residuals, conjugate
// normal draws for the leaf means, then a scaled-inverse-chisq draw for
// the error variance. Returns `draws` post-burn-in samples; responses
// are centered internally and leaves are shifted back on export. The
// draw sequence is a pure function of the seed.
std::vector<PosteriorDraw> fit(const Dataset& data, const SamplerConfig& cfg);

// Log integrated likelihood of residuals under `tree` with the leaf
// means marginalized out against a N(0, leaf_sd^2) prior. Observations
// are routed to leaves by the dataset covariates. Returns -infinity
// when any leaf holds no observations (an invalid proposal).
double log_marginal_likelihood(const Tree& tree, const Dataset& data,
                               std::span<const double> residuals, double sigma,
                               double leaf_sd);

}  // namespace treesobol

#endif  // TREESOBOL_SAMPLER_HPP
