#include "tev/ev_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "tev/errors.hpp"

namespace tev {

namespace {

constexpr double kSocTol = 1e-9;

// Top-15 EV models by 2016-2019 U.S. sales share.
constexpr const char* kBuiltinCatalog =
    "model,sale_pct,range_miles,charger_kw,miles_per_kwh\n"
    "Tesla Model 3,44.11%,220,11.5,3.84\n"
    "Tesla Model S,14.52%,285,11.5,3.33\n"
    "Tesla Model X,12.92%,258,11.5,2.85\n"
    "Chevy Bolt,8.66%,238,3.3,3.57\n"
    "Nissan Leaf,7.79%,151,3.3,3.33\n"
    "BMW i3,3.70%,153,7.4,3.84\n"
    "VW e-Golf,2.04%,125,7.2,3.57\n"
    "Fiat 500E,1.48%,84,6.6,3.33\n"
    "Audi e-tron,0.80%,204,11,2.17\n"
    "Kia Soul EV,0.76%,111,6.6,3.22\n"
    "Ford Focus EV,0.49%,115,6.6,3.22\n"
    "Smart ED,0.46%,58,3.3,3.22\n"
    "Chevy Spark,0.46%,84,3.3,3.57\n"
    "Jaguar I-Pace,0.44%,234,7,2.27\n"
    "Honda Clarity BEV,0.42%,89,7.7,3.33\n";

std::string fmt_row(int row, const std::string& col) {
  std::ostringstream os;
  os << "row " << row << ", column '" << col << "'";
  return os.str();
}

}  // namespace

ChargeMode parse_charge_mode(const std::string& text) {
  if (text == "V1G" || text == "v1g") return ChargeMode::V1G;
  if (text == "V2G" || text == "v2g") return ChargeMode::V2G;
  throw ConfigError("unknown charge mode '" + text + "' (expected V1G or V2G)");
}

const char* to_string(ChargeMode mode) { return mode == ChargeMode::V1G ? "V1G" : "V2G"; }

void EvSpec::validate() const {
  auto fail = [&](const char* what) {
    throw ConfigError("EV spec '" + model_name + "': " + what);
  };
  if (!(range_miles > 0)) fail("range must be positive");
  if (!(miles_per_kwh > 0)) fail("mileage must be positive");
  if (!(charge_kw > 0)) fail("charger rating must be positive");
  if (!(discharge_kw >= 0)) fail("discharge rating must be non-negative");
  if (!(eta_in > 0 && eta_in <= 1)) fail("eta_in must be in (0,1]");
  if (!(eta_out > 0 && eta_out <= 1)) fail("eta_out must be in (0,1]");
  if (!(sale_weight >= 0)) fail("sale weight must be non-negative");
}

bool DrivingSchedule::plugged_at(int hod) const {
  if (t_in < t_out) return hod >= t_in && hod < t_out;
  return hod >= t_in || hod < t_out;
}

void DrivingSchedule::validate() const {
  if (t_in < 0 || t_in > 23 || t_out < 0 || t_out > 23)
    throw ConfigError("schedule hours must be in 0..23");
  if (t_in == t_out) throw ConfigError("schedule arrival and departure hours coincide");
  if (!(daily_miles > 0)) throw ConfigError("daily miles must be positive");
}

void AgentConfig::validate() const {
  spec.validate();
  schedule.validate();
  if (!(slider >= 0 && slider <= 1)) throw ConfigError("slider must be in [0,1]");
  if (!(inconvenience_rate >= 0 && smoothing_coeff >= 0 && degradation_rate >= 0))
    throw ConfigError("alpha, beta and phi must be non-negative");
}

HorizonSets horizon_sets(const DrivingSchedule& schedule, int start_hour, int n) {
  HorizonSets sets;
  sets.start_hour = start_hour;
  sets.horizon_len = n;
  sets.kinds.resize(n);
  sets.transactive.resize(n);
  for (int t = 0; t < n; ++t) {
    const int hod = (start_hour + t) % 24;
    HourKind kind = HourKind::Away;
    if (hod == schedule.t_in) {
      kind = HourKind::Arrival;
      sets.arrival_hours.push_back(t);
    } else if (hod == schedule.t_out) {
      kind = HourKind::Departure;
      sets.departure_hours.push_back(t);
    } else if (schedule.plugged_at(hod)) {
      kind = HourKind::Parked;
    }
    sets.kinds[t] = kind;
    sets.transactive[t] = kind == HourKind::Arrival || kind == HourKind::Parked;
  }
  return sets;
}

EvState EvState::full(const EvSpec& spec) {
  EvState s;
  s.c_max = spec.capacity_kwh();
  s.c_min = spec.min_soc_kwh();
  s.soc = s.c_max;
  return s;
}

MeteredEnergy metered_energy(double e_in, double e_out, const EvSpec& spec) {
  return {e_in / spec.eta_in, e_out * spec.eta_out};
}

EvState step_soc(const EvState& state, double e_in, double e_out, HourKind kind,
                 double daily_miles, const EvSpec& spec, double hour_fraction) {
  if (e_in < -kSocTol || e_out < -kSocTol)
    throw PhysicsViolation("negative energy exchange");
  if (e_in > spec.charge_kw * hour_fraction + kSocTol)
    throw PhysicsViolation("charging energy exceeds charger rating");
  if (e_out > spec.discharge_kw * hour_fraction + kSocTol)
    throw PhysicsViolation("discharging energy exceeds discharge rating");

  EvState next = state;
  next.hour_energy_in = std::max(0.0, e_in);
  next.hour_energy_out = std::max(0.0, e_out);
  const double drain = 0.5 * daily_miles / spec.miles_per_kwh * hour_fraction;
  switch (kind) {
    case HourKind::Arrival:
      next.soc = state.soc - drain + next.hour_energy_in - next.hour_energy_out;
      break;
    case HourKind::Parked:
      next.soc = state.soc + next.hour_energy_in - next.hour_energy_out;
      break;
    case HourKind::Departure:
    case HourKind::Away:
      if (e_in > kSocTol || e_out > kSocTol)
        throw PhysicsViolation("energy exchanged while the vehicle is unplugged");
      next.hour_energy_in = next.hour_energy_out = 0.0;
      if (kind == HourKind::Departure) next.soc = state.soc - drain;
      break;
  }
  if (next.soc > state.c_max + kSocTol || next.soc < state.c_min - kSocTol) {
    std::ostringstream os;
    os << std::setprecision(12) << "SOC " << next.soc << " kWh outside [" << state.c_min << ", "
       << state.c_max << "]";
    throw PhysicsViolation(os.str());
  }
  return next;
}

// ---------------------------------------------------------------------------

std::vector<EvSpec> load_ev_catalog(std::istream& in, ChargeMode mode) {
  std::string line;
  int row = 0;
  if (!csv::next_record(in, line, row)) throw ParseError("empty catalog");
  const auto header = csv::split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"model", "sale_pct", "range_miles", "charger_kw", "miles_per_kwh"}) {
    if (!col.count(required))
      throw ParseError(std::string("catalog header missing column '") + required + "'", row, required);
  }

  std::vector<EvSpec> out;
  while (csv::next_record(in, line, row)) {
    const auto cells = csv::split(line);
    if (cells.size() != header.size()) {
      throw ParseError("catalog row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(header.size()),
                       row);
    }
    auto number = [&](const std::string& name) {
      std::string cell = cells[col.at(name)];
      const auto v = csv::parse_double(cell);
      if (!v) throw ParseError("cannot parse number '" + cell + "' at " + fmt_row(row, name), row, name);
      return *v;
    };
    auto optional_number = [&](const std::string& name, double fallback) {
      if (!col.count(name) || cells[col.at(name)].empty()) return fallback;
      return number(name);
    };

    EvSpec spec;
    spec.model_name = cells[col.at("model")];
    std::string pct = cells[col.at("sale_pct")];
    if (!pct.empty() && pct.back() == '%') pct.pop_back();
    const auto share = csv::parse_double(csv::trim(pct));
    if (!share)
      throw ParseError("cannot parse sale share '" + cells[col.at("sale_pct")] + "' at " +
                           fmt_row(row, "sale_pct"),
                       row, "sale_pct");
    spec.sale_weight = *share / 100.0;
    spec.range_miles = number("range_miles");
    spec.charge_kw = number("charger_kw");
    spec.miles_per_kwh = number("miles_per_kwh");
    spec.discharge_kw = mode == ChargeMode::V2G ? optional_number("discharge_kw", spec.charge_kw) : 0.0;
    spec.eta_in = optional_number("eta_in", 0.9);
    spec.eta_out = optional_number("eta_out", 0.9);
    try {
      spec.validate();
    } catch (const ConfigError& e) {
      throw ParseError(std::string(e.what()) + " (row " + std::to_string(row) + ")", row);
    }
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw ParseError("empty catalog");
  return out;
}

std::vector<EvSpec> load_ev_catalog_file(const std::string& path, ChargeMode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog '" + path + "'");
  return load_ev_catalog(in, mode);
}

std::vector<EvSpec> builtin_ev_catalog(ChargeMode mode) {
  std::istringstream in(kBuiltinCatalog);
  return load_ev_catalog(in, mode);
}

std::vector<DrivingSchedule> load_schedules(std::istream& in) {
  std::string line;
  int row = 0;
  if (!csv::next_record(in, line, row)) throw ParseError("empty schedule file");
  const auto header = csv::split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"t_in", "t_out", "daily_miles"}) {
    if (!col.count(required))
      throw ParseError(std::string("schedule header missing column '") + required + "'", row, required);
  }
  std::vector<DrivingSchedule> out;
  while (csv::next_record(in, line, row)) {
    const auto cells = csv::split(line);
    if (cells.size() != header.size())
      throw ParseError("schedule row " + std::to_string(row) + " has wrong cell count", row);
    DrivingSchedule s;
    const auto tin = csv::parse_int(cells[col["t_in"]]);
    const auto tout = csv::parse_int(cells[col["t_out"]]);
    const auto miles = csv::parse_double(cells[col["daily_miles"]]);
    if (!tin) throw ParseError("bad t_in at " + fmt_row(row, "t_in"), row, "t_in");
    if (!tout) throw ParseError("bad t_out at " + fmt_row(row, "t_out"), row, "t_out");
    if (!miles) throw ParseError("bad daily_miles at " + fmt_row(row, "daily_miles"), row, "daily_miles");
    s.t_in = *tin;
    s.t_out = *tout;
    s.daily_miles = *miles;
    try {
      s.validate();
    } catch (const ConfigError& e) {
      throw ParseError(std::string(e.what()) + " (row " + std::to_string(row) + ")", row);
    }
    out.push_back(s);
  }
  if (out.empty()) throw ParseError("empty schedule file");
  return out;
}

std::vector<DrivingSchedule> load_schedules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file '" + path + "'");
  return load_schedules(in);
}

void write_schedules(std::ostream& out, const std::vector<DrivingSchedule>& pool) {
  out << "t_in,t_out,daily_miles\n";
  for (const auto& s : pool) out << s.t_in << ',' << s.t_out << ',' << s.daily_miles << '\n';
}

std::vector<DrivingSchedule> synthesize_schedules(std::size_t n, std::uint64_t seed) {
  // Relative frequencies by hour of day.
  constexpr std::array<double, 24> arrive = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                             1, 1, 2, 3, 5, 9, 10, 8, 4, 2, 1, 0};
  constexpr std::array<double, 24> depart = {0, 0, 0, 0, 0, 2, 5, 9, 10, 7, 3, 1,
                                             0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> t_in(arrive.begin(), arrive.end());
  std::discrete_distribution<int> t_out(depart.begin(), depart.end());
  std::lognormal_distribution<double> miles(std::log(25.0), 0.55);

  std::vector<DrivingSchedule> pool;
  pool.reserve(n);
  while (pool.size() < n) {
    DrivingSchedule s;
    s.t_in = t_in(rng);
    s.t_out = t_out(rng);
    s.daily_miles = std::max(1.0, std::round(miles(rng) * 10.0) / 10.0);
    if (s.t_in == s.t_out) continue;
    pool.push_back(s);
  }
  return pool;
}

bool pairing_feasible(const EvSpec& spec, const DrivingSchedule& schedule) {
  // The round trip must leave the reserve floor untouched.
  if (!(schedule.daily_miles <= (1.0 - EvSpec::kMinSocFraction) * spec.range_miles)) return false;
  return schedule.plugged_hours() * spec.charge_kw > spec.capacity_kwh();
}

std::vector<AgentConfig> synthesize_fleet(const std::vector<EvSpec>& catalog,
                                          const std::vector<DrivingSchedule>& schedules,
                                          std::size_t n, std::uint64_t seed,
                                          const SliderDistribution& slider_dist,
                                          const AgentDefaults& defaults) {
  if (n < 1) throw ConfigError("fleet size must be at least 1");
  if (catalog.empty()) throw ConfigError("empty EV catalog");
  if (schedules.empty()) throw ConfigError("empty schedule pool");
  if (slider_dist.kind == SliderDistribution::Kind::Stratified && slider_dist.values.empty())
    throw ConfigError("stratified slider distribution needs values");

  std::vector<double> weights;
  for (const auto& s : catalog) weights.push_back(s.sale_weight);
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w <= 0; }))
    throw ConfigError("catalog sale weights are all zero");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_model(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> pick_schedule(0, schedules.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<AgentConfig> fleet;
  fleet.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentConfig a;
    a.agent_id = static_cast<int>(i);
    a.spec = catalog[pick_model(rng)];
    switch (slider_dist.kind) {
      case SliderDistribution::Kind::Fixed:
        a.slider = slider_dist.values.empty() ? slider_dist.low : slider_dist.values.front();
        break;
      case SliderDistribution::Kind::Uniform:
        a.slider = slider_dist.low + (slider_dist.high - slider_dist.low) * unit(rng);
        break;
      case SliderDistribution::Kind::Stratified:
        a.slider = slider_dist.values[i % slider_dist.values.size()];
        break;
    }
    a.inconvenience_rate = defaults.inconvenience_rate;
    a.smoothing_coeff = defaults.smoothing_coeff;
    a.degradation_rate = defaults.degradation_rate;

    bool found = false;
    for (int attempt = 0; attempt < kMaxPairingAttempts; ++attempt) {
      const auto& candidate = schedules[pick_schedule(rng)];
      if (pairing_feasible(a.spec, candidate)) {
        a.schedule = candidate;
        found = true;
        break;
      }
    }
    if (!found) {
      throw FleetError("no feasible driving schedule for EV model '" + a.spec.model_name + "' after " +
                           std::to_string(kMaxPairingAttempts) + " attempts",
                       a.spec.model_name);
    }
    a.validate();
    fleet.push_back(std::move(a));
  }
  return fleet;
}

}  // namespace tev
