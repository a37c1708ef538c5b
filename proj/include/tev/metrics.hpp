#pragma once

#include <optional>
#include <vector>

#include "tev/ev_model.hpp"

namespace tev {

/// Hourly record of one simulated run over the measured window (warm-up
/// already cut). Agent vectors are indexed by fleet position.
struct RunTrace {
  int first_hour = 0;
  std::vector<double> substation_load;  // kWh per hour, inflexible + EVs
  std::vector<double> ev_load;          // kWh per hour, EV metered net
  std::vector<double> da_price;         // final day-ahead price per hour
  std::vector<double> rt_price;         // every real-time slot
  std::vector<std::vector<double>> agent_soc;     // [agent][hour], end of hour
  std::vector<std::vector<double>> agent_energy;  // [agent][hour], metered net
  std::vector<double> agent_bill;                 // $ over the window
  std::vector<int> agent_deviation_slots;
  double converged_fraction = 0.0;  // target hours converged before delivery
  std::vector<int> unconverged_hours;
};

struct BaseCaseTrace {
  std::vector<double> energy_in;  // battery side per hour
  std::vector<double> metered;    // billed per hour
  std::vector<double> soc;        // end of hour
  double bill = 0.0;
};

/// Non-transactive reference: full-rate charging from arrival until full,
/// never discharging, billed at the given hourly prices.
BaseCaseTrace base_case_sim(const AgentConfig& agent, const std::vector<double>& price_trace,
                            int start_hour, double initial_soc);

/// Percentage bill reduction; a zero base bill is reported as 0.
double savings(double bill_trans, double bill_base);

/// Fully charged hours relative to the base case, in percent. Empty when the
/// base case is never full.
std::optional<double> amenity(const std::vector<double>& soc_trans,
                              const std::vector<double>& soc_base, double c_max, double eps_full);

inline constexpr double kFullChargeFraction = 0.01;

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Population variance.
double variance(const std::vector<double>& v);

struct AgentReport {
  int agent_id = 0;
  double savings_pct = 0.0;
  std::optional<double> amenity_pct;
  double slider = 0.0;
  int arrival_hour = 0;
  double charger_kw = 0.0;
  double daily_miles = 0.0;
  double total_bill_transactive = 0.0;
  double total_bill_base = 0.0;
};

std::vector<AgentReport> agent_reports(const std::vector<AgentConfig>& agents,
                                       const RunTrace& base, const RunTrace& trans);

struct SystemReport {
  double peak_load_base = 0.0;
  double peak_load_transactive = 0.0;
  double peak_price_base = 0.0;
  double peak_price_transactive = 0.0;
  double ev_variance_base = 0.0;
  double ev_variance_transactive = 0.0;
  std::vector<double> load_profile_base;
  std::vector<double> load_profile_transactive;
  double converged_fraction = 0.0;
};

SystemReport system_report(const RunTrace& base, const RunTrace& trans);

}  // namespace tev
