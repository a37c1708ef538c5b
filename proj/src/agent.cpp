#include "tev/agent.hpp"

#include <algorithm>

namespace tev {

AgentRuntime::AgentRuntime(const AgentConfig& cfg) : config(cfg), state(EvState::full(cfg.spec)) {}

namespace {

// Previous plan moved forward by `shift` hours; hours past its end are idle.
Schedule shifted_plan(const Schedule& prev, int shift, int horizon) {
  Schedule s;
  s.start_hour = prev.start_hour + shift;
  const auto take = [&](const std::vector<double>& v, double fill) {
    std::vector<double> out(horizon, fill);
    for (int t = 0; t < horizon && t + shift < static_cast<int>(v.size()); ++t) out[t] = v[t + shift];
    return out;
  };
  s.q_plan = take(prev.q_plan, 0.0);
  s.e_in = take(prev.e_in, 0.0);
  s.e_out = take(prev.e_out, 0.0);
  const double tail_soc = prev.soc_traj.empty() ? 0.0 : prev.soc_traj.back();
  s.soc_traj = take(prev.soc_traj, tail_soc);
  s.objective_value = prev.objective_value;
  return s;
}

}  // namespace

void plan_agent(AgentRuntime& agent, int clock_hour, const PriceForecast& forecast,
                const PlanSettings& settings) {
  const AgentConfig& cfg = agent.config;
  const int n = settings.horizon;
  const HorizonSets sets = horizon_sets(cfg.schedule, clock_hour, n);

  if (settings.policy == AgentPolicy::BaseCase) {
    agent.plan = greedy_full_charge(cfg, sets, agent.state.soc);
  } else if (agent.last_solve_hour >= 0 && clock_hour - agent.last_solve_hour < settings.replan_every) {
    agent.plan = shifted_plan(agent.plan, clock_hour - agent.plan.start_hour, n);
  } else {
    agent.plan = optimal_schedule(cfg, sets, forecast, agent.state.soc, settings.qp,
                                  DepartureRule::RelaxUnreachable);
    agent.last_solve_hour = clock_hour;
  }

  agent.bids.resize(n);
  const bool flexible = settings.policy == AgentPolicy::Transactive && cfg.slider > 0.0;
  const double slope = flexible ? bid_slope(forecast.prices, cfg.slider, cfg.spec).value : 0.0;
  for (int t = 0; t < n; ++t) {
    const double q = sets.transactive[t] ? agent.plan.q_plan[t] : 0.0;
    if (flexible && sets.transactive[t]) {
      agent.bids[t] =
          four_point_bid(q, forecast.prices[t], slope, settings.deadband, cfg.spec, cfg.slider);
    } else {
      agent.bids[t] = inflexible_bid(q, forecast.prices[t], cfg.spec);
    }
  }
}

BidCurve agent_rt_bid(const AgentRuntime& agent, int slot, const PlanSettings& settings) {
  const BidCurve& hour_bid = agent.bids.front();
  double next = agent.da_cleared_q;
  if (settings.rt_anchor == RtAnchor::Interpolate && hour_bid.flexible && agent.plan.q_plan.size() > 1)
    next = agent.plan.q_plan[1];
  return rt_bid(agent.da_cleared_q, next, slot, hour_bid, agent.da_cleared_price);
}

}  // namespace tev
