// treesobol: exact Sobol' indices for additive regression-tree ensembles.
//
// Subcommands:
//   indices <ensemble-or-posterior.json>   print a Sobol' report
//   fit <data.csv> --config <cfg.json>     sample a posterior and save it
//   scenario <scenario.json>               run a simulation cell, emit metrics
//   demo-counts                            the count-inflation demonstration
//   lhd <n> <p> <seed>                     print a maximin Latin hypercube

#include <fstream>
#include <iostream>
#include <span>

#include <CLI11.hpp>
#include <json.hpp>

#include "treesobol/activity.hpp"
#include "treesobol/harness.hpp"
#include "treesobol/lhd.hpp"
#include "treesobol/oracle.hpp"
#include "treesobol/ranking.hpp"
#include "treesobol/serialize.hpp"
#include "treesobol/sobol.hpp"

using namespace treesobol;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SamplerConfig sampler_config_from(const json& j) {
  SamplerConfig cfg;
  maybe_get(j, "trees", cfg.trees);
  maybe_get(j, "draws", cfg.draws);
  maybe_get(j, "burn", cfg.burn);
  maybe_get(j, "alpha", cfg.alpha);
  maybe_get(j, "beta", cfg.beta);
  maybe_get(j, "k", cfg.leaf_prior_k);
  maybe_get(j, "nu", cfg.nu);
  maybe_get(j, "q", cfg.q);
  maybe_get(j, "cutpoints", cfg.cutpoints);
  maybe_get(j, "seed", cfg.seed);
  validate_config(cfg);
  return cfg;
}

Scenario scenario_from(const json& j) {
  Scenario s;
  maybe_get(j, "function", s.function);
  maybe_get(j, "p_over_p0", s.p_over_p0);
  maybe_get(j, "n_per_p", s.n_per_p);
  maybe_get(j, "noise_ratio", s.noise_ratio);
  maybe_get(j, "replicates", s.replicates);
  maybe_get(j, "draws", s.draws);
  maybe_get(j, "burn", s.burn);
  maybe_get(j, "trees", s.trees);
  maybe_get(j, "seed", s.seed);
  maybe_get(j, "lhd_restarts", s.lhd_restarts);
  maybe_get(j, "threads", s.threads);
  validate_scenario(s);
  return s;
}

void print_report(std::ostream& os, const SobolReport& rep) {
  os << "total variance: " << rep.total_variance;
  if (rep.degenerate) os << "  (degenerate: normalized indices reported as 0)";
  os << "\n\n  dim        V_i        S_i        T_i\n";
  for (int i = 0; i < rep.dim; ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "  x%-3d %10.6g %10.6f %10.6f\n", i + 1,
                  rep.first_order_V[i], rep.first_order_S[i], rep.total_effect_S[i]);
    os << line;
  }
  if (!rep.second_order.empty()) {
    os << "\n  pair          V_ij       S_ij\n";
    for (const auto& pair : rep.second_order) {
      char line[128];
      std::snprintf(line, sizeof line, "  x%d+x%-5d %10.6g %10.6f\n", pair.i + 1,
                    pair.j + 1, pair.V, pair.S);
      os << line;
    }
  }
}

int run_indices(const std::string& path, const std::string& csv_out, bool second_order,
                int threads) {
  ReportOptions opts;
  opts.second_order = second_order;
  opts.threads = threads;
  if (is_posterior_file(path)) {
    const auto posterior = load_posterior(path);
    const ProductMeasure m = ProductMeasure::uniform(posterior.front().ensemble.domain);
    const AggregateReport agg = aggregate(posterior, m, opts);
    std::cout << "posterior file: " << posterior.size() << " draws, "
              << agg.degenerate_draws << " degenerate (excluded)\n\n"
              << "posterior-mean indices:\n";
    print_report(std::cout, agg.mean);
    if (!csv_out.empty()) {
      std::ofstream out(csv_out);
      write_aggregate_csv(out, agg);
      std::cout << "\nper-draw csv written to " << csv_out << "\n";
    }
  } else {
    const Ensemble ens = load_ensemble(path);
    const ProductMeasure m = ProductMeasure::uniform(ens.domain);
    const SobolReport rep = report(ens, m, opts);
    print_report(std::cout, rep);
    if (!csv_out.empty()) {
      std::ofstream out(csv_out);
      write_report_csv(out, rep);
      std::cout << "\ncsv written to " << csv_out << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact variance-based sensitivity indices for tree ensembles"};
  app.require_subcommand(1);

  // indices
  std::string indices_path, indices_csv;
  bool no_second = false;
  int threads = 1;
  auto* indices_cmd = app.add_subcommand("indices", "Sobol' report for an ensemble file");
  indices_cmd->add_option("file", indices_path, "ensemble or posterior JSON")->required();
  indices_cmd->add_option("--csv", indices_csv, "write draw,set,V,S,T rows here");
  indices_cmd->add_flag("--no-second-order", no_second, "skip pairwise indices");
  indices_cmd->add_option("--threads", threads, "worker threads for posterior files");

  // fit
  std::string fit_data, fit_config, fit_out = "posterior.json";
  auto* fit_cmd = app.add_subcommand("fit", "sample a sum-of-trees posterior from csv data");
  fit_cmd->add_option("data", fit_data, "csv with feature columns then y")->required();
  fit_cmd->add_option("--config", fit_config, "sampler settings JSON");
  fit_cmd->add_option("--out", fit_out, "posterior output path");

  // scenario
  std::string scenario_config, scenario_csv;
  auto* scenario_cmd = app.add_subcommand("scenario", "run one simulation-study cell");
  scenario_cmd->add_option("config", scenario_config, "scenario JSON")->required();
  scenario_cmd->add_option("--csv", scenario_csv, "metric row output path");

  // demo-counts
  DemoConfig demo;
  std::string demo_csv;
  auto* demo_cmd = app.add_subcommand("demo-counts", "count-inflation demonstration");
  demo_cmd->add_option("--n", demo.n, "training points");
  demo_cmd->add_option("--draws", demo.draws, "posterior draws");
  demo_cmd->add_option("--burn", demo.burn, "burn-in iterations");
  demo_cmd->add_option("--trees", demo.trees, "ensemble size");
  demo_cmd->add_option("--seed", demo.seed, "seed");
  demo_cmd->add_option("--threads", demo.threads, "worker threads");
  demo_cmd->add_option("--csv", demo_csv, "per-draw counts and indices output path");

  // lhd
  int lhd_n = 0, lhd_p = 0, lhd_restarts = 100;
  std::uint64_t lhd_seed = 0;
  auto* lhd_cmd = app.add_subcommand("lhd", "maximin Latin hypercube design (csv to stdout)");
  lhd_cmd->add_option("n", lhd_n, "points")->required();
  lhd_cmd->add_option("p", lhd_p, "dimensions")->required();
  lhd_cmd->add_option("seed", lhd_seed, "seed")->required();
  lhd_cmd->add_option("--restarts", lhd_restarts, "candidate designs to score");

  CLI11_PARSE(app, argc, argv);

  try {
    if (indices_cmd->parsed())
      return run_indices(indices_path, indices_csv, !no_second, threads);

    if (fit_cmd->parsed()) {
      std::ifstream in(fit_data);
      if (!in) throw std::runtime_error("cannot open data file: " + fit_data);
      const Dataset data = read_dataset_csv(in);
      const SamplerConfig cfg =
          fit_config.empty() ? SamplerConfig{} : sampler_config_from(load_json_file(fit_config));
      const auto posterior = fit(data, cfg);
      save_posterior(posterior, fit_out);
      std::cout << "fit " << data.n << " observations, " << data.p << " inputs; wrote "
                << posterior.size() << " draws to " << fit_out << "\n";
      return 0;
    }

    if (scenario_cmd->parsed()) {
      const Scenario s = scenario_from(load_json_file(scenario_config));
      const MetricRow row = run_scenario(s);
      if (scenario_csv.empty()) {
        write_metric_csv(std::cout, row);
      } else {
        std::ofstream out(scenario_csv);
        write_metric_csv(out, row);
        std::cout << "metrics written to " << scenario_csv << "\n";
      }
      return 0;
    }

    if (demo_cmd->parsed()) {
      const DemoResult result = run_demo_counts(demo);
      std::cout << "  var   mean count   mean S_i\n";
      for (int j = 0; j < 3; ++j) {
        char line[96];
        std::snprintf(line, sizeof line, "  x%d %12.2f %10.4f\n", j + 1,
                      result.mean_counts[j], result.mean_first_order[j]);
        std::cout << line;
      }
      std::cout << "counts order the variables " << (result.mean_counts[0] > result.mean_counts[2] && result.mean_counts[1] > result.mean_counts[2] ? "x1, x2 above x3" : "unexpectedly")
                << "; indices put x3 on top when S_3 exceeds the others\n";
      if (!demo_csv.empty()) {
        std::ofstream out(demo_csv);
        write_count_index_csv(out, result.per_draw_counts, result.per_draw_unique,
                              result.per_draw_S);
        std::cout << "per-draw csv written to " << demo_csv << "\n";
      }
      return 0;
    }

    if (lhd_cmd->parsed()) {
      const auto design = maximin_lhd(lhd_n, lhd_p, lhd_seed, lhd_restarts);
      for (int j = 0; j < lhd_p; ++j) std::cout << 'x' << (j + 1) << (j + 1 < lhd_p ? ',' : '\n');
      for (int i = 0; i < lhd_n; ++i)
        for (int j = 0; j < lhd_p; ++j)
          std::cout << design[i * lhd_p + j] << (j + 1 < lhd_p ? ',' : '\n');
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
