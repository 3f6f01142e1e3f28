#ifndef TREESOBOL_HARNESS_HPP
#define TREESOBOL_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treesobol/activity.hpp"
#include "treesobol/sampler.hpp"
#include "treesobol/sobol.hpp"
#include "treesobol/test_functions.hpp"

namespace treesobol {

// One cell of the simulation grid: p/p0 in {1,2,3}, n in {10p, 50p},
// noise variance in {0.10, 0.25} of Var(f) (0 allowed as a test mode).
struct Scenario {
  std::string function = "friedman";
  int p_over_p0 = 1;
  int n_per_p = 50;
  double noise_ratio = 0.10;
  int replicates = 10;
  int draws = 1000;
  int burn = 100;
  int trees = 200;
  std::uint64_t seed = 0;
  int lhd_restarts = 100;
  int threads = 1;

  int p() const;
  int n() const { return n_per_p * p(); }
  std::string id() const;
};

void validate_scenario(const Scenario& s);

// f on a maximin LHD plus N(0, sigma^2) noise, sigma^2 = ratio * Var(f).
Dataset make_dataset(const Scenario& s, std::uint64_t seed);

// mean over draws of the L1 distance sum_i |v_i - truth_i|
double l1_metric(const std::vector<std::vector<double>>& per_draw,
                 std::span<const double> truth);

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
};

// draw-averaged metrics for one replicate data set
struct ReplicateMetrics {
  double l1_s = 0.0;
  double l1_s2 = 0.0;
  double l1_t = 0.0;
  double dr_s = 0.0;
  double dr_count_s = 0.0;
  double dr_t = 0.0;
  double dr_count_t = 0.0;
  double dr_s2 = 0.0;
};

struct MetricRow {
  std::string scenario;
  int replicates = 0;
  Stat l1_s;        // first-order indices vs truth
  Stat l1_s2;       // second-order
  Stat l1_t;        // total effects
  Stat dr_s;        // rank discrepancy, indices vs true first-order ranking
  Stat dr_count_s;  // one-way counts vs the same ranking
  Stat dr_t;        // total effects vs true total-effects ranking
  Stat dr_count_t;  // counts vs total-effects ranking
  Stat dr_s2;       // second-order indices vs true pair ranking
  std::vector<ReplicateMetrics> per_replicate;
};

MetricRow run_scenario(const Scenario& s);

void write_metric_csv(std::ostream& os, const MetricRow& row);

// Count-inflation demo: data from (x1-.5)(x2-.5) + .5(x3-.5) on [0,1]^3,
// where the counts put x1, x2 on top while the first-order indices put
// x3 on top.
struct DemoConfig {
  int n = 300;
  int draws = 1000;
  int burn = 100;
  int trees = 200;
  double noise_ratio = 0.10;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct DemoResult {
  std::vector<double> mean_counts;            // per variable
  std::vector<double> mean_first_order;       // per variable
  std::vector<std::vector<long>> per_draw_counts;
  std::vector<std::vector<long>> per_draw_unique;
  std::vector<std::vector<double>> per_draw_S;
};

DemoResult run_demo_counts(const DemoConfig& cfg = {});

// header row, p feature columns, then y
Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& os, const Dataset& data);

}  // namespace treesobol

#endif  // TREESOBOL_HARNESS_HPP
