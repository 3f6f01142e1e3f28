#include "treesobol/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "treesobol/lhd.hpp"
#include "treesobol/ranking.hpp"
#include "treesobol/rng.hpp"

namespace treesobol {

int Scenario::p() const { return test_function(function).active_inputs * p_over_p0; }

std::string Scenario::id() const {
  std::ostringstream ss;
  ss << function << "_p" << p() << "_n" << n() << "_noise" << noise_ratio;
  return ss.str();
}

void validate_scenario(const Scenario& s) {
  test_function(s.function);  // throws on unknown name
  if (s.p_over_p0 < 1 || s.p_over_p0 > 3)
    throw std::invalid_argument("scenario: p/p0 must be 1, 2, or 3");
  if (s.n_per_p != 10 && s.n_per_p != 50)
    throw std::invalid_argument("scenario: n must be 10p or 50p");
  if (s.noise_ratio != 0.0 && s.noise_ratio != 0.10 && s.noise_ratio != 0.25)
    throw std::invalid_argument("scenario: noise ratio must be 0.10 or 0.25 (or 0 in tests)");
  if (s.replicates < 1 || s.draws < 1 || s.burn < 0 || s.trees < 1)
    throw std::invalid_argument("scenario: bad replication settings");
  if (s.lhd_restarts < 1 || s.threads < 1)
    throw std::invalid_argument("scenario: bad execution settings");
}

Dataset make_dataset(const Scenario& s, std::uint64_t seed) {
  validate_scenario(s);
  const TestFunction& fn = test_function(s.function);
  const int p = s.p();
  const int n = s.n();
  Rng root(seed);
  const std::uint64_t lhd_seed = root.spawn(0).seed();
  Rng noise = root.spawn(1);

  Dataset data;
  data.n = n;
  data.p = p;
  data.x = maximin_lhd(n, p, lhd_seed, s.lhd_restarts);
  data.y.resize(n);
  const double sigma = std::sqrt(s.noise_ratio * fn.variance);
  for (int i = 0; i < n; ++i) {
    const std::span<const double> row(data.x.data() + static_cast<std::size_t>(i) * p, p);
    data.y[i] = fn.eval(row) + sigma * noise.normal();
  }
  return data;
}

double l1_metric(const std::vector<std::vector<double>>& per_draw,
                 std::span<const double> truth) {
  if (per_draw.empty()) throw std::invalid_argument("l1_metric: no draws");
  double total = 0.0;
  for (const auto& draw : per_draw) {
    if (draw.size() != truth.size())
      throw std::invalid_argument("l1_metric: length mismatch with truth");
    for (std::size_t i = 0; i < truth.size(); ++i) total += std::abs(draw[i] - truth[i]);
  }
  return total / static_cast<double>(per_draw.size());
}

namespace {

Stat summarize(const std::vector<double>& xs) {
  Stat st;
  for (double v : xs) st.mean += v;
  st.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double v : xs) ss += (v - st.mean) * (v - st.mean);
    st.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return st;
}

std::vector<double> counts_as_doubles(const std::vector<long>& counts) {
  return {counts.begin(), counts.end()};
}

}  // namespace

MetricRow run_scenario(const Scenario& s) {
  validate_scenario(s);
  const int p = s.p();
  const TrueReport truth = true_report(s.function, p);
  const std::vector<double> truth_s2 = true_second_order(s.function, p);
  // exact ties in the published tables must register as ties
  const Ranking rank_truth_s = competition_rank(truth.first_order, 1e-12);
  const Ranking rank_truth_t = competition_rank(truth.total_effect, 1e-12);
  const Ranking rank_truth_s2 = competition_rank(truth_s2, 1e-12);

  std::vector<ReplicateMetrics> reps;
  Rng master(s.seed);

  for (int r = 0; r < s.replicates; ++r) {
    const Rng rep_rng = master.spawn(r);
    const Dataset data = make_dataset(s, rep_rng.spawn(0).seed());

    SamplerConfig cfg;
    cfg.trees = s.trees;
    cfg.draws = s.draws;
    cfg.burn = s.burn;
    cfg.seed = rep_rng.spawn(1).seed();
    const std::vector<PosteriorDraw> posterior = fit(data, cfg);

    const ProductMeasure measure = ProductMeasure::uniform(posterior.front().ensemble.domain);
    ReportOptions opts;
    opts.second_order = true;
    opts.threads = s.threads;
    const AggregateReport agg = aggregate(posterior, measure, opts);

    double a_l1s = 0.0, a_l1s2 = 0.0, a_l1t = 0.0;
    double a_drs = 0.0, a_drcs = 0.0, a_drt = 0.0, a_drct = 0.0, a_drs2 = 0.0;
    for (std::size_t d = 0; d < posterior.size(); ++d) {
      const SobolReport& rep = agg.per_draw[d];
      for (int i = 0; i < p; ++i) {
        a_l1s += std::abs(rep.first_order_S[i] - truth.first_order[i]);
        a_l1t += std::abs(rep.total_effect_S[i] - truth.total_effect[i]);
      }
      std::vector<double> s2(rep.second_order.size());
      for (std::size_t k = 0; k < s2.size(); ++k) {
        s2[k] = rep.second_order[k].S;
        a_l1s2 += std::abs(s2[k] - truth_s2[k]);
      }
      const std::vector<long> counts = one_way_counts(posterior[d].ensemble);
      const Ranking rank_s = competition_rank(rep.first_order_S, 0.0);
      const Ranking rank_t = competition_rank(rep.total_effect_S, 0.0);
      const Ranking rank_c = competition_rank(counts_as_doubles(counts), 0.0);
      const Ranking rank_s2 = competition_rank(s2, 0.0);
      a_drs += d_r(rank_truth_s, rank_s);
      a_drcs += d_r(rank_truth_s, rank_c);
      a_drt += d_r(rank_truth_t, rank_t);
      a_drct += d_r(rank_truth_t, rank_c);
      a_drs2 += d_r(rank_truth_s2, rank_s2);
    }
    const double inv = 1.0 / static_cast<double>(posterior.size());
    reps.push_back(ReplicateMetrics{a_l1s * inv, a_l1s2 * inv, a_l1t * inv, a_drs * inv,
                                    a_drcs * inv, a_drt * inv, a_drct * inv, a_drs2 * inv});
  }

  auto stat_of = [&](double ReplicateMetrics::* field) {
    std::vector<double> xs;
    xs.reserve(reps.size());
    for (const ReplicateMetrics& rm : reps) xs.push_back(rm.*field);
    return summarize(xs);
  };

  MetricRow row;
  row.scenario = s.id();
  row.replicates = s.replicates;
  row.l1_s = stat_of(&ReplicateMetrics::l1_s);
  row.l1_s2 = stat_of(&ReplicateMetrics::l1_s2);
  row.l1_t = stat_of(&ReplicateMetrics::l1_t);
  row.dr_s = stat_of(&ReplicateMetrics::dr_s);
  row.dr_count_s = stat_of(&ReplicateMetrics::dr_count_s);
  row.dr_t = stat_of(&ReplicateMetrics::dr_t);
  row.dr_count_t = stat_of(&ReplicateMetrics::dr_count_t);
  row.dr_s2 = stat_of(&ReplicateMetrics::dr_s2);
  row.per_replicate = std::move(reps);
  return row;
}

void write_metric_csv(std::ostream& os, const MetricRow& row) {
  os << "scenario,replicates,"
        "l1_s_mean,l1_s_sd,l1_s2_mean,l1_s2_sd,l1_t_mean,l1_t_sd,"
        "dr_s_mean,dr_s_sd,dr_count_s_mean,dr_count_s_sd,"
        "dr_t_mean,dr_t_sd,dr_count_t_mean,dr_count_t_sd,dr_s2_mean,dr_s2_sd\n";
  os << row.scenario << ',' << row.replicates << ',' << row.l1_s.mean << ',' << row.l1_s.sd
     << ',' << row.l1_s2.mean << ',' << row.l1_s2.sd << ',' << row.l1_t.mean << ','
     << row.l1_t.sd << ',' << row.dr_s.mean << ',' << row.dr_s.sd << ','
     << row.dr_count_s.mean << ',' << row.dr_count_s.sd << ',' << row.dr_t.mean << ','
     << row.dr_t.sd << ',' << row.dr_count_t.mean << ',' << row.dr_count_t.sd << ','
     << row.dr_s2.mean << ',' << row.dr_s2.sd << '\n';
}

namespace {

double demo_fn(std::span<const double> x) {
  return (x[0] - 0.5) * (x[1] - 0.5) + 0.5 * (x[2] - 0.5);
}

// Var of the demo function: interaction 1/144 plus main effect 0.25/12
constexpr double kDemoVariance = 1.0 / 144.0 + 0.25 / 12.0;

}  // namespace

DemoResult run_demo_counts(const DemoConfig& cfg) {
  const int p = 3;
  Rng root(cfg.seed);

  Dataset data;
  data.n = cfg.n;
  data.p = p;
  data.x = maximin_lhd(cfg.n, p, root.spawn(0).seed(), 100);
  data.y.resize(cfg.n);
  Rng noise = root.spawn(1);
  const double sigma = std::sqrt(cfg.noise_ratio * kDemoVariance);
  for (int i = 0; i < cfg.n; ++i) {
    const std::span<const double> row(data.x.data() + static_cast<std::size_t>(i) * p, p);
    data.y[i] = demo_fn(row) + sigma * noise.normal();
  }

  SamplerConfig sampler_cfg;
  sampler_cfg.trees = cfg.trees;
  sampler_cfg.draws = cfg.draws;
  sampler_cfg.burn = cfg.burn;
  sampler_cfg.seed = root.spawn(2).seed();
  const std::vector<PosteriorDraw> posterior = fit(data, sampler_cfg);

  const ProductMeasure measure = ProductMeasure::uniform(posterior.front().ensemble.domain);
  ReportOptions opts;
  opts.second_order = false;
  opts.threads = cfg.threads;
  const AggregateReport agg = aggregate(posterior, measure, opts);

  DemoResult out;
  out.mean_counts.assign(p, 0.0);
  out.mean_first_order = agg.mean.first_order_S;
  for (std::size_t d = 0; d < posterior.size(); ++d) {
    out.per_draw_counts.push_back(one_way_counts(posterior[d].ensemble));
    out.per_draw_unique.push_back(unique_rule_counts(posterior[d].ensemble));
    out.per_draw_S.push_back(agg.per_draw[d].first_order_S);
    for (int j = 0; j < p; ++j) out.mean_counts[j] += out.per_draw_counts.back()[j];
  }
  for (int j = 0; j < p; ++j) out.mean_counts[j] /= static_cast<double>(posterior.size());
  return out;
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("data csv: missing header");
  std::size_t columns = 1;
  for (char c : line) columns += (c == ',');
  if (columns < 2) throw std::runtime_error("data csv: need feature columns and y");

  Dataset data;
  data.p = columns - 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t k = 0;
    for (; std::getline(row, cell, ','); ++k) {
      double value;
      try {
        value = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("data csv: non-numeric cell '" + cell + "'");
      }
      if (k < data.p)
        data.x.push_back(value);
      else
        data.y.push_back(value);
    }
    if (k != columns) throw std::runtime_error("data csv: ragged row");
    ++data.n;
  }
  validate_dataset(data);
  return data;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (std::size_t j = 0; j < data.p; ++j) os << 'x' << (j + 1) << ',';
  os << "y\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.p; ++j) os << data.x_at(i, j) << ',';
    os << data.y[i] << '\n';
  }
}

}  // namespace treesobol
