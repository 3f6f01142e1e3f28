#include <benchmark/benchmark.h>

#include "treesobol/oracle.hpp"
#include "treesobol/rng.hpp"
#include "treesobol/sobol.hpp"

using namespace treesobol;

namespace {

// ensemble shaped like a mid-sized posterior draw: m shallow trees
Ensemble posterior_like(int p, int m, std::uint64_t seed) {
  Rng rng(seed);
  Ensemble ens;
  ens.domain = Domain::unit_cube(p);
  for (int t = 0; t < m; ++t) {
    Tree tree = Tree::stump(rng.normal());
    const int leaves = 2 + static_cast<int>(rng.uniform_int(3));
    struct Open {
      int idx;
      std::vector<double> lo, hi;
    };
    std::vector<Open> open{{0, ens.domain.lo, ens.domain.hi}};
    for (int grown = 1; grown < leaves; ++grown) {
      const std::size_t pick = rng.uniform_int(open.size());
      Open node = open[pick];
      open.erase(open.begin() + pick);
      const int dim = static_cast<int>(rng.uniform_int(p));
      const double cut = rng.uniform(node.lo[dim], node.hi[dim]);
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{-1, -1, {}, rng.normal()});
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{-1, -1, {}, rng.normal()});
      tree.nodes[node.idx].left = left;
      tree.nodes[node.idx].right = right;
      tree.nodes[node.idx].split = SplitRule{dim, cut};
      Open l = node, r = node;
      l.idx = left;
      l.hi[dim] = cut;
      r.idx = right;
      r.lo[dim] = cut;
      open.push_back(l);
      open.push_back(r);
    }
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

}  // namespace

static void BM_FirstOrderKernel(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Ensemble ens = posterior_like(5, m, 17);
  const ProductMeasure measure = ProductMeasure::uniform(ens.domain);
  for (auto _ : state) {
    SobolCache cache(ens, measure);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += cache.closed_variance({i});
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_FirstOrderKernel)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

static void BM_TotalEffectKernel(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Ensemble ens = posterior_like(5, m, 23);
  const ProductMeasure measure = ProductMeasure::uniform(ens.domain);
  for (auto _ : state) {
    SobolCache cache(ens, measure);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += cache.total_effect(i);
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_TotalEffectKernel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_FullReport(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Ensemble ens = posterior_like(5, m, 29);
  const ProductMeasure measure = ProductMeasure::uniform(ens.domain);
  for (auto _ : state) {
    const SobolReport rep = report(ens, measure);
    benchmark::DoNotOptimize(rep.total_variance);
  }
}
BENCHMARK(BM_FullReport)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_GridOracle(benchmark::State& state) {
  const Ensemble ens = posterior_like(3, static_cast<int>(state.range(0)), 31);
  const ProductMeasure measure = ProductMeasure::uniform(ens.domain);
  for (auto _ : state) {
    GridOracle oracle(ens, measure);
    benchmark::DoNotOptimize(oracle.total_variance());
  }
}
BENCHMARK(BM_GridOracle)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
