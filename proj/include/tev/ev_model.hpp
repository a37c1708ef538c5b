#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tev {

enum class ChargeMode { V1G, V2G };

ChargeMode parse_charge_mode(const std::string& text);
const char* to_string(ChargeMode mode);

/// Physical parameters of one vehicle model. Energies are per one-hour step,
/// so the charger ratings in kW double as kWh per hour.
struct EvSpec {
  std::string model_name;
  double range_miles = 0.0;
  double miles_per_kwh = 0.0;
  double charge_kw = 0.0;
  double discharge_kw = 0.0;
  double eta_in = 0.9;
  double eta_out = 0.9;
  double sale_weight = 0.0;

  /// Battery capacity, range over mileage.
  double capacity_kwh() const { return range_miles / miles_per_kwh; }
  /// Reserve floor kept below which the battery never goes.
  double min_soc_kwh() const { return kMinSocFraction * capacity_kwh(); }

  void validate() const;

  static constexpr double kMinSocFraction = 0.05;
};

struct DrivingSchedule {
  int t_in = 18;
  int t_out = 8;
  double daily_miles = 0.0;

  /// Hours between arrival and departure, wrapping midnight.
  int plugged_hours() const { return ((t_out - t_in) % 24 + 24) % 24; }
  bool plugged_at(int hour_of_day) const;
  void validate() const;
};

enum class HourKind { Arrival, Departure, Parked, Away };

/// Per-hour classification of a horizon window. Indices are relative to
/// start_hour.
struct HorizonSets {
  int start_hour = 0;
  int horizon_len = 0;
  std::vector<HourKind> kinds;
  std::vector<bool> transactive;
  std::vector<int> arrival_hours;
  std::vector<int> departure_hours;
};

HorizonSets horizon_sets(const DrivingSchedule& schedule, int start_hour, int n);

struct EvState {
  double soc = 0.0;
  double c_max = 0.0;
  double c_min = 0.0;
  double hour_energy_in = 0.0;
  double hour_energy_out = 0.0;

  static EvState full(const EvSpec& spec);
};

struct AgentConfig {
  EvSpec spec;
  DrivingSchedule schedule;
  double slider = 0.5;
  double inconvenience_rate = 0.02;
  double smoothing_coeff = 0.001;
  double degradation_rate = 0.0;
  int agent_id = 0;

  void validate() const;
};

struct MeteredEnergy {
  double in_billed = 0.0;
  double out_billed = 0.0;
  double net() const { return in_billed - out_billed; }
};

MeteredEnergy metered_energy(double e_in, double e_out, const EvSpec& spec);

/// Advances the SOC by one step. `hour_fraction` scales the driving drain so
/// the same rule serves sub-hourly control slots; the default is a full hour.
/// Arrival hours are plugged in after the drain, so they also carry the
/// exchanged energy. Throws PhysicsViolation when the result leaves
/// [c_min, c_max] or energy is exchanged while unplugged.
EvState step_soc(const EvState& state, double e_in, double e_out, HourKind kind,
                 double daily_miles, const EvSpec& spec, double hour_fraction = 1.0);

/// Energy drained by the driving half-trip booked on arrival/departure hours.
inline double half_trip_kwh(const DrivingSchedule& s, const EvSpec& spec) {
  return 0.5 * s.daily_miles / spec.miles_per_kwh;
}

// ---- catalog / schedules -------------------------------------------------

std::vector<EvSpec> load_ev_catalog(std::istream& in, ChargeMode mode);
std::vector<EvSpec> load_ev_catalog_file(const std::string& path, ChargeMode mode);
/// Top-15 2016-2019 U.S. sales table shipped with the project.
std::vector<EvSpec> builtin_ev_catalog(ChargeMode mode);

std::vector<DrivingSchedule> load_schedules(std::istream& in);
std::vector<DrivingSchedule> load_schedules_file(const std::string& path);
void write_schedules(std::ostream& out, const std::vector<DrivingSchedule>& pool);

/// Seeded stand-in for a travel-survey pool: arrivals peak 17-19h,
/// departures 7-9h, daily miles lognormal with a 25 mile median.
std::vector<DrivingSchedule> synthesize_schedules(std::size_t n, std::uint64_t seed);

struct SliderDistribution {
  enum class Kind { Fixed, Uniform, Stratified };
  Kind kind = Kind::Uniform;
  double low = 0.0;
  double high = 1.0;
  std::vector<double> values;  // Fixed uses values[0]; Stratified cycles

  static SliderDistribution fixed(double v) { return {Kind::Fixed, v, v, {v}}; }
  static SliderDistribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, {}}; }
  static SliderDistribution stratified(std::vector<double> v) {
    return {Kind::Stratified, 0.0, 1.0, std::move(v)};
  }
};

struct AgentDefaults {
  double inconvenience_rate = 0.02;
  double smoothing_coeff = 0.001;
  double degradation_rate = 0.0;
};

/// True when the pairing passes both screens: the daily trip fits above the
/// reserve floor and the plug-in window can refill a full battery.
bool pairing_feasible(const EvSpec& spec, const DrivingSchedule& schedule);

inline constexpr int kMaxPairingAttempts = 10000;

std::vector<AgentConfig> synthesize_fleet(const std::vector<EvSpec>& catalog,
                                          const std::vector<DrivingSchedule>& schedules,
                                          std::size_t n, std::uint64_t seed,
                                          const SliderDistribution& slider_dist,
                                          const AgentDefaults& defaults = {});

}  // namespace tev
