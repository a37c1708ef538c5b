#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tev/ev_model.hpp"
#include "tev/qp_solver.hpp"

namespace tev {

struct PriceForecast {
  int start_hour = 0;
  std::vector<double> prices;  // $/kWh, one per horizon hour

  double max() const;
  double min() const;
};

/// The per-agent scheduling QP. Decision vector is [e_in(0..N-1), e_out(0..N-1)]
/// in battery-side kWh. SOC is eliminated: every SOC row is a cumulative sum
/// of (e_in - e_out) offset by the initial SOC and the driving drain.
struct ScheduleQp {
  DenseQp qp;
  int start_hour = 0;
  int horizon_len = 0;
  EvSpec spec;
  double initial_soc = 0.0;
  std::vector<double> cumulative_drain;  // kWh drained up to and including hour t
  std::vector<int> departure_hours;      // relative indices carrying a full-SOC equality
  std::vector<double> departure_targets; // SOC required entering each of them

  int in_index(int t) const { return t; }
  int out_index(int t) const { return horizon_len + t; }
};

struct Schedule {
  int start_hour = 0;
  std::vector<double> q_plan;  // metered net kWh, e_in/eta_in - e_out*eta_out
  std::vector<double> e_in;
  std::vector<double> e_out;
  std::vector<double> soc_traj;  // SOC at the end of each hour
  double objective_value = 0.0;
  int solver_iterations = 0;
};

/// The horizon cannot meet a full-SOC departure (or keeps the SOC above its
/// floor) even with the charger at full rating.
class InfeasibleHorizon : public std::runtime_error {
 public:
  InfeasibleHorizon(const std::string& msg, int hour, double shortfall)
      : std::runtime_error(msg), hour_(hour), shortfall_(shortfall) {}
  /// Relative index of the binding hour (the departure hour itself for a
  /// missed full charge).
  int hour() const { return hour_; }
  double shortfall_kwh() const { return shortfall_; }

 private:
  int hour_;
  double shortfall_;
};

enum class DepartureRule {
  Strict,            // infeasible departures raise InfeasibleHorizon
  RelaxUnreachable,  // target the highest reachable SOC instead
};

/// Highest SOC reachable at the end of each hour when charging at full rating
/// from `initial_soc` (capped at capacity).
std::vector<double> max_reachable_soc(const AgentConfig& agent, const HorizonSets& sets,
                                      double initial_soc);

ScheduleQp build_qp(const AgentConfig& agent, const HorizonSets& sets, const PriceForecast& forecast,
                    double initial_soc, DepartureRule rule = DepartureRule::Strict);

Schedule solve_qp(const ScheduleQp& problem, const QpSettings& settings = {});

Schedule optimal_schedule(const AgentConfig& agent, const HorizonSets& sets,
                          const PriceForecast& forecast, double initial_soc,
                          const QpSettings& settings = {},
                          DepartureRule rule = DepartureRule::Strict);

/// Non-transactive plan: charge at full rating from arrival until full.
Schedule greedy_full_charge(const AgentConfig& agent, const HorizonSets& sets, double initial_soc);

}  // namespace tev
