// Serial reference against the OpenMP path for the per-agent kernels that
// dominate a market hour: QP re-planning and real-time bid construction.

#include <benchmark/benchmark.h>

#include <vector>

#include "tev/fleet.hpp"
#include "tev/simulation.hpp"

namespace {

struct Setup {
  std::vector<tev::AgentRuntime> agents;
  tev::PriceForecast forecast;
  tev::PlanSettings settings;
};

Setup make_setup(int n) {
  tev::ScenarioConfig cfg;
  cfg.fleet_size = n;
  cfg.mode = tev::ChargeMode::V2G;
  cfg.schedule_pool = 500;
  Setup s;
  for (const auto& a : tev::build_fleet(cfg)) {
    s.agents.emplace_back(a);
    // Start part-empty so the departure rows bind.
    s.agents.back().state.soc = 0.6 * s.agents.back().state.c_max;
  }
  s.forecast.start_hour = 12;
  for (int t = 0; t < s.settings.horizon; ++t) {
    const int hod = (12 + t) % 24;
    s.forecast.prices.push_back(hod >= 17 && hod <= 21 ? 0.11 : 0.05 + 0.001 * hod);
  }
  return s;
}

void plan(benchmark::State& state, tev::Execution exec) {
  Setup s = make_setup(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    // Force a fresh QP solve instead of reusing the previous plan.
    for (auto& a : s.agents) a.last_solve_hour = -1;
    tev::plan_fleet(s.agents, 12, s.forecast, s.settings, exec);
    benchmark::DoNotOptimize(s.agents.front().plan.q_plan.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = exec == tev::Execution::Parallel ? tev::available_threads() : 1;
}

void rt_bids(benchmark::State& state, tev::Execution exec) {
  Setup s = make_setup(static_cast<int>(state.range(0)));
  tev::plan_fleet(s.agents, 12, s.forecast, s.settings, tev::Execution::Serial);
  for (auto _ : state) {
    for (int slot = 0; slot < tev::kRtSlotsPerHour; ++slot) {
      auto bids = tev::rt_bids_fleet(s.agents, slot, s.settings, exec);
      benchmark::DoNotOptimize(bids.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * tev::kRtSlotsPerHour);
}

void BM_PlanFleetSerial(benchmark::State& st) { plan(st, tev::Execution::Serial); }
void BM_PlanFleetParallel(benchmark::State& st) { plan(st, tev::Execution::Parallel); }
void BM_RtBidsSerial(benchmark::State& st) { rt_bids(st, tev::Execution::Serial); }
void BM_RtBidsParallel(benchmark::State& st) { rt_bids(st, tev::Execution::Parallel); }

}  // namespace

BENCHMARK(BM_PlanFleetSerial)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlanFleetParallel)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RtBidsSerial)->Arg(20)->Arg(80)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RtBidsParallel)->Arg(20)->Arg(80)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
