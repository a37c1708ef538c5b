#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tev/agent.hpp"
#include "tev/fleet.hpp"
#include "tev/market.hpp"
#include "tev/metrics.hpp"

namespace tev {

/// Non-EV household load: every house follows the same diurnal shape with
/// morning and evening peaks, scaled by a seeded per-house factor. Real-time
/// actuals add seeded per-slot noise of relative amplitude `rt_noise`.
class InflexibleLoad {
 public:
  InflexibleLoad(int houses, double rt_noise, std::uint64_t seed);

  static double house_profile_kw(int hour_of_day);
  /// Expected energy in an absolute hour, kWh.
  double forecast(int hour) const;
  /// Realised energy in one five-minute slot, kWh.
  double actual_slot(int hour, int slot) const;

 private:
  double scale_sum_ = 0.0;
  double rt_noise_;
  std::uint64_t seed_;
};

struct ScenarioConfig {
  int days = 7;
  int fleet_size = 20;
  std::uint64_t seed = 1;
  ChargeMode mode = ChargeMode::V1G;
  SliderDistribution slider =
      SliderDistribution::stratified({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  AgentDefaults agent;
  double deadband = 0.002;
  int horizon = 48;
  RtAnchor rt_anchor = RtAnchor::Hold;
  int replan_every = 1;
  SupplyModel supply;
  int houses = 66;
  double rt_noise = 0.05;
  std::string catalog_path;    // empty: built-in table
  std::string schedules_path;  // empty: synthesized pool
  int schedule_pool = 2000;
  int warmup_days = 2;
  double convergence_epsilon = 0.001;
  int convergence_window = 6;
  std::vector<double> phi_sweep = {0.0, 0.005, 0.008, 0.015};
  std::string output_dir = "out";
  bool parallel = true;

  void validate() const;
};

/// Parses the JSON scenario format documented in the README. Unknown keys
/// are rejected so that typos surface as ConfigError.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);
std::string config_to_json(const ScenarioConfig& config);

std::vector<AgentConfig> build_fleet(const ScenarioConfig& config);

struct AuditReport {
  int soc_violations = 0;
  int conservation_violations = 0;
  int unlogged_deviations = 0;
  int logged_deviations = 0;
  int checked_clearings = 0;
  int checked_controls = 0;

  bool ok() const {
    return soc_violations == 0 && conservation_violations == 0 && unlogged_deviations == 0;
  }
};

struct RunResult {
  RunTrace trace;
  std::vector<ClearedResult> da_results;  // every round and lead time
  std::vector<ClearedResult> rt_results;
  std::vector<ControlAction> controls;
  PriceEvolution evolution;
  AuditReport audit;
};

/// Runs the coupled day-ahead / real-time loop for one policy.
RunResult run_market(const ScenarioConfig& config, const std::vector<AgentConfig>& fleet,
                     AgentPolicy policy);

/// Re-validates conservation and physics over a finished run.
AuditReport audit_run(const RunResult& run, const std::vector<AgentConfig>& fleet);

struct ScenarioOutcome {
  std::vector<AgentConfig> fleet;
  RunResult base;
  RunResult transactive;
  std::vector<AgentReport> agents;
  SystemReport system;
  double spearman_savings = 0.0;
  double spearman_amenity = 0.0;
};

ScenarioOutcome run_scenario(const ScenarioConfig& config);

/// Writes CSV logs and the summary JSON into `dir` (created if missing).
void write_outputs(const ScenarioOutcome& outcome, const ScenarioConfig& config,
                   const std::string& dir);

struct ModeComparisonRow {
  double phi = 0.0;
  double savings_v1g = 0.0;  // fleet mean, percent
  double savings_v2g = 0.0;
  double delta_savings = 0.0;
  double peak_reduction_v1g = 0.0;  // percent of base peak
  double peak_reduction_v2g = 0.0;
  double delta_peak_reduction = 0.0;
  bool audits_ok = true;
};

/// Paired V1G/V2G runs over the configured degradation sweep, one shared
/// base case and fleet.
std::vector<ModeComparisonRow> compare_modes(const ScenarioConfig& config);
void write_mode_comparison(const std::vector<ModeComparisonRow>& rows, const std::string& dir);

double mean_savings(const std::vector<AgentReport>& reports);

}  // namespace tev
