// Microbenchmarks for the inference hot paths. Run ./lifted_bench;
// see --benchmark_filter to pick one.

#include <benchmark/benchmark.h>

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lifted/experiment.hpp"
#include "lifted/ldjt.hpp"
#include "lifted/stats.hpp"
#include "lifted/tame.hpp"

using namespace lifted;

namespace {

std::vector<double> random_table(std::mt19937_64& rng, std::size_t len) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::vector<double> t(len);
  for (auto& v : t) v = u(rng);
  return t;
}

// Singleton constraint classes over one PRV, tables jittered around two
// centres so DBSCAN has real work to do.
std::vector<Parfactor> clustered_points(int n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  PRV prv;
  prv.name = "P";
  prv.logvars = {"X"};
  std::vector<Parfactor> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double base = (i % 2) ? 5.0 : 1.0;
    std::vector<double> table{base + jitter(rng), 2.0 + jitter(rng)};
    out.emplace_back(std::vector<PRV>{prv}, std::move(table),
                     Constraint::explicit_set({{"X", n}}, {{i}}));
  }
  return out;
}

// Evidence with dropout so the state accumulates constraint classes.
std::vector<std::vector<Event>> bench_evidence(int people, int steps) {
  std::mt19937_64 rng(17);
  std::vector<std::vector<Event>> ev(steps + 1);
  for (int s = 0; s <= steps; ++s)
    for (int i = 0; i < people; ++i) {
      const bool value = rng() & 1ull;
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < 0.3) continue;
      ev[s].push_back(
          {"D", {"p" + std::to_string(i)}, value ? "true" : "false"});
    }
  return ev;
}

void BM_rsim(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto a = random_table(rng, state.range(0));
  const auto b = random_table(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rsim(a, b));
}
BENCHMARK(BM_rsim)->Range(4, 4096);

void BM_dbscan(benchmark::State& state) {
  const auto points = clustered_points(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto res = dbscan(points, 0.05);
    benchmark::DoNotOptimize(res.clusters.size());
  }
}
BENCHMARK(BM_dbscan)->Range(8, 256);

void BM_tame_pass(benchmark::State& state) {
  const auto points = clustered_points(static_cast<int>(state.range(0)));
  TameConfig cfg;
  for (auto _ : state) {
    auto [merged, reports] = tame(points, cfg);
    benchmark::DoNotOptimize(merged.size());
  }
}
BENCHMARK(BM_tame_pass)->Range(8, 256);

void BM_f_critical(benchmark::State& state) {
  const int d2 = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(f_critical(0.005, 1, d2));
}
BENCHMARK(BM_f_critical)->Arg(2)->Arg(20)->Arg(200);

void BM_advance(benchmark::State& state) {
  const int people = static_cast<int>(state.range(0));
  const bool merge = state.range(1) != 0;
  PDM pdm = reputation_pdm(people, 2);
  auto ev = bench_evidence(people, 3);
  LdjtState base = LdjtState::start(pdm, ev[0]);
  base.advance(ev[1]);
  base.advance(ev[2]);
  TameConfig cfg;
  const auto tcfg =
      merge ? std::optional<TameConfig>(cfg) : std::optional<TameConfig>();
  for (auto _ : state) {
    state.PauseTiming();
    LdjtState s = base;
    state.ResumeTiming();
    s.advance(ev[3], tcfg);
    benchmark::DoNotOptimize(s.t());
  }
}
BENCHMARK(BM_advance)
    ->ArgsProduct({{8, 16, 32}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
