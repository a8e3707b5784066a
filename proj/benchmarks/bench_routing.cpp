#include <benchmark/benchmark.h>

#include "entroute/mc_engine.hpp"
#include "entroute/routing_global.hpp"
#include "entroute/routing_local.hpp"

using namespace entroute;

namespace {

const Topology& grid() {
  static const Topology g = build_grid(41, 41);
  return g;
}

std::pair<NodeId, NodeId> diagonal(int n) {
  const Topology& g = grid();
  return {g.at({20 - n / 4, 20 - n / 4}), g.at({20 - n / 4 + n / 2, 20 - n / 4 + n / 2})};
}

}  // namespace

// Edge states straight off the counter-based stream, every edge touched.
static void BM_SampleInstance(benchmark::State& state) {
  const Topology& g = grid();
  const LinkSampler sampler(g, LinkModel::direct(0.6));
  std::uint64_t i = 0;
  for (auto _ : state) {
    const LinkInstance links = sampler.view(trial_key(1, i++));
    std::size_t up = 0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) up += links.up(e);
    benchmark::DoNotOptimize(up);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.edge_count()));
}
BENCHMARK(BM_SampleInstance);

static void BM_GreedyRoute(benchmark::State& state) {
  const Topology& g = grid();
  const LinkSampler sampler(g, LinkModel::direct(state.range(1) / 100.0));
  PathFinder finder(g);
  const auto [a, b] = diagonal(static_cast<int>(state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    const PathSet paths = finder.greedy(sampler.view(trial_key(2, i++)), a, b);
    benchmark::DoNotOptimize(paths.size());
  }
}
BENCHMARK(BM_GreedyRoute)->ArgsProduct({{4, 10, 20}, {60, 90}});

static void BM_LocalTrace(benchmark::State& state) {
  const Topology& g = grid();
  const LinkSampler sampler(g, LinkModel::direct(state.range(1) / 100.0));
  const auto [a, b] = diagonal(static_cast<int>(state.range(0)));
  const SlotPlan plan = SlotPlan::single_flow(g, {a, b, DistanceMetric::l2()});
  ChainTracer tracer(g);
  std::uint64_t i = 0;
  for (auto _ : state) {
    const std::uint64_t key = trial_key(3, i);
    const LinkInstance links = sampler.view(key);
    tracer.begin(plan, Trial{i++, key, links});
    double score = 0.0;
    tracer.trace_from(a, [&](NodeId end, auto swaps, auto&&) {
      if (end == b) score += static_cast<double>(swaps);
    });
    benchmark::DoNotOptimize(score);
  }
}
BENCHMARK(BM_LocalTrace)->ArgsProduct({{4, 10, 20}, {60, 90}});

static void BM_EstimateRg(benchmark::State& state) {
  const Topology& g = grid();
  const auto [a, b] = diagonal(10);
  SimParams s;
  s.link = LinkModel::direct(0.6);
  s.q = 0.9;
  s.trials = 10000;
  s.workers = 1;
  for (auto _ : state) {
    s.seed++;
    benchmark::DoNotOptimize(estimate_R_g(g, s, a, b).mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.trials));
}
BENCHMARK(BM_EstimateRg)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
