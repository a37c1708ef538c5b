#pragma once

#include <vector>

#include "tev/agent.hpp"

namespace tev {

/// Per-agent work between market barriers. Serial is the reference; Parallel
/// spreads agents over OpenMP threads (identical results, agents share no
/// state). Failures are collected per agent and the lowest-index one is
/// rethrown as a SimulationError naming the hour and agent.
enum class Execution { Serial, Parallel };

void plan_fleet(std::vector<AgentRuntime>& agents, int clock_hour, const PriceForecast& forecast,
                const PlanSettings& settings, Execution exec);

std::vector<BidCurve> rt_bids_fleet(const std::vector<AgentRuntime>& agents, int slot,
                                    const PlanSettings& settings, Execution exec);

std::vector<ControlAction> control_fleet(std::vector<AgentRuntime>& agents,
                                         const std::vector<double>& committed_slot_kwh, int hour,
                                         int slot, Execution exec);

/// Plug state of a schedule at an absolute hour.
HourKind hour_kind(const DrivingSchedule& schedule, int hour);

/// Number of OpenMP threads available, 1 without OpenMP.
int available_threads();

}  // namespace tev
