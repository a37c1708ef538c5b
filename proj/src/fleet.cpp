#include "tev/fleet.hpp"

#include <exception>
#include <string>

#include "tev/errors.hpp"

#ifdef TEV_HAVE_OPENMP
#include <omp.h>
#endif

namespace tev {

namespace {

// Runs body(i) for every agent, capturing exceptions per index.
template <class Body>
void for_each_agent(std::size_t n, Execution exec, int hour,
                    const std::vector<AgentRuntime>& agents, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
  if (exec == Execution::Parallel) {
#ifdef TEV_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    const int id = agents[i].config.agent_id;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError("agent " + std::to_string(id) + " at hour " + std::to_string(hour) +
                                ": " + e.what(),
                            hour, id);
    }
  }
}

}  // namespace

HourKind hour_kind(const DrivingSchedule& schedule, int hour) {
  return horizon_sets(schedule, hour, 1).kinds.front();
}

int available_threads() {
#ifdef TEV_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void plan_fleet(std::vector<AgentRuntime>& agents, int clock_hour, const PriceForecast& forecast,
                const PlanSettings& settings, Execution exec) {
  for_each_agent(agents.size(), exec, clock_hour, agents,
                 [&](std::size_t i) { plan_agent(agents[i], clock_hour, forecast, settings); });
}

std::vector<BidCurve> rt_bids_fleet(const std::vector<AgentRuntime>& agents, int slot,
                                    const PlanSettings& settings, Execution exec) {
  std::vector<BidCurve> out(agents.size());
  const int hour = agents.empty() ? 0 : agents.front().plan.start_hour;
  for_each_agent(agents.size(), exec, hour, agents,
                 [&](std::size_t i) { out[i] = agent_rt_bid(agents[i], slot, settings); });
  return out;
}

std::vector<ControlAction> control_fleet(std::vector<AgentRuntime>& agents,
                                         const std::vector<double>& committed, int hour, int slot,
                                         Execution exec) {
  std::vector<ControlAction> out(agents.size());
  for_each_agent(agents.size(), exec, hour, agents, [&](std::size_t i) {
    AgentRuntime& a = agents[i];
    const HourKind kind = hour_kind(a.config.schedule, hour);
    out[i] = apply_control(a.state, committed[i], kind, a.config.schedule.daily_miles, a.config.spec);
    out[i].agent_id = a.config.agent_id;
    out[i].hour = hour;
    out[i].slot = slot;
  });
  return out;
}

}  // namespace tev
