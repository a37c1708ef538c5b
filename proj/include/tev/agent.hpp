#pragma once

#include <vector>

#include "tev/bidding.hpp"
#include "tev/control.hpp"
#include "tev/scheduler.hpp"

namespace tev {

enum class AgentPolicy {
  Transactive,  // plans with the QP and bids four-point curves
  BaseCase,     // charges greedily and bids vertical curves
};

enum class RtAnchor {
  Hold,         // every slot anchored at the day-ahead cleared quantity
  Interpolate,  // slots walk from the cleared quantity toward the next hour's plan
};

struct PlanSettings {
  int horizon = 48;
  double deadband = 0.002;
  QpSettings qp;
  AgentPolicy policy = AgentPolicy::Transactive;
  RtAnchor rt_anchor = RtAnchor::Hold;
  /// Re-solve the QP every this many hours; in between the previous plan is
  /// shifted forward and the uncovered tail planned as idle.
  int replan_every = 1;
};

/// Everything one agent carries between market rounds.
struct AgentRuntime {
  AgentConfig config;
  EvState state;
  Schedule plan;
  std::vector<BidCurve> bids;  // day-ahead bids, one per horizon hour
  int last_solve_hour = -1;
  double da_cleared_q = 0.0;   // this hour's day-ahead commitment
  double da_cleared_price = 0.0;

  explicit AgentRuntime(const AgentConfig& cfg);
};

/// Re-plans from the current SOC at `clock_hour` and rebuilds the bids.
void plan_agent(AgentRuntime& agent, int clock_hour, const PriceForecast& forecast,
                const PlanSettings& settings);

/// Per-slot real-time bid for the current hour.
BidCurve agent_rt_bid(const AgentRuntime& agent, int slot, const PlanSettings& settings);

}  // namespace tev
