#include "tev/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tev/errors.hpp"

namespace tev {

using nlohmann::json;

// ---- inflexible load ------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a pure function of its arguments.
double hashed_unit(std::uint64_t seed, int hour, int slot) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(hour));
  h = splitmix64(h ^ static_cast<std::uint64_t>(slot));
  return 2.0 * static_cast<double>(h >> 11) * 0x1.0p-53 - 1.0;
}

double bump(double hod, double center, double width) {
  double d = std::fabs(hod - center);
  d = std::min(d, 24.0 - d);
  return std::exp(-0.5 * (d / width) * (d / width));
}

}  // namespace

InflexibleLoad::InflexibleLoad(int houses, double rt_noise, std::uint64_t seed)
    : rt_noise_(rt_noise), seed_(seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x686f757365ULL));
  std::uniform_real_distribution<double> scale(0.8, 1.2);
  for (int i = 0; i < houses; ++i) scale_sum_ += scale(rng);
}

double InflexibleLoad::house_profile_kw(int hour_of_day) {
  const double h = static_cast<double>(((hour_of_day % 24) + 24) % 24);
  return 0.6 + 0.5 * bump(h, 7.5, 1.5) + 1.0 * bump(h, 19.0, 2.5);
}

double InflexibleLoad::forecast(int hour) const { return scale_sum_ * house_profile_kw(hour); }

double InflexibleLoad::actual_slot(int hour, int slot) const {
  const double mean = forecast(hour) / kRtSlotsPerHour;
  if (rt_noise_ == 0.0) return mean;
  return mean * (1.0 + rt_noise_ * hashed_unit(seed_, hour, slot));
}

// ---- configuration --------------------------------------------------------

void ScenarioConfig::validate() const {
  if (days < 3) throw ConfigError("days must be >= 3 (two warm-up days plus one measured)");
  if (warmup_days < 0 || warmup_days >= days) throw ConfigError("warmup_days must be in [0, days)");
  if (fleet_size < 1) throw ConfigError("fleet_size must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(deadband >= 0)) throw ConfigError("deadband must be >= 0");
  if (replan_every < 1) throw ConfigError("replan_every must be >= 1");
  if (houses < 0) throw ConfigError("houses must be >= 0");
  if (!(rt_noise >= 0 && rt_noise < 1)) throw ConfigError("rt_noise must be in [0, 1)");
  if (schedule_pool < 1) throw ConfigError("schedule_pool must be >= 1");
  if (!(convergence_epsilon > 0)) throw ConfigError("convergence epsilon must be > 0");
  if (convergence_window < 2) throw ConfigError("convergence window must be >= 2");
  if (!(agent.inconvenience_rate >= 0) || !(agent.smoothing_coeff >= 0) ||
      !(agent.degradation_rate >= 0))
    throw ConfigError("alpha, beta and phi must be >= 0");
  for (double p : phi_sweep)
    if (!(p >= 0)) throw ConfigError("phi sweep values must be >= 0");
  switch (slider.kind) {
    case SliderDistribution::Kind::Fixed:
    case SliderDistribution::Kind::Stratified:
      if (slider.values.empty()) throw ConfigError("slider needs at least one value");
      for (double v : slider.values)
        if (!(v >= 0 && v <= 1)) throw ConfigError("slider values must lie in [0, 1]");
      break;
    case SliderDistribution::Kind::Uniform:
      if (!(0 <= slider.low && slider.low <= slider.high && slider.high <= 1))
        throw ConfigError("slider range must satisfy 0 <= low <= high <= 1");
      break;
  }
  supply.validate();
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

RtAnchor parse_anchor(const std::string& s) {
  if (s == "hold") return RtAnchor::Hold;
  if (s == "interpolate") return RtAnchor::Interpolate;
  throw ConfigError("rt_anchor must be 'hold' or 'interpolate', got '" + s + "'");
}

const char* anchor_name(RtAnchor a) { return a == RtAnchor::Hold ? "hold" : "interpolate"; }

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  check_keys(j,
             {"days", "fleet_size", "seed", "mode", "slider", "agent", "market", "supply",
              "inflexible", "inputs", "metrics", "compare", "output_dir", "parallel"},
             "config");
  read(j, "days", c.days, "config");
  read(j, "fleet_size", c.fleet_size, "config");
  read(j, "seed", c.seed, "config");
  read(j, "output_dir", c.output_dir, "config");
  read(j, "parallel", c.parallel, "config");
  if (j.contains("mode")) {
    try {
      c.mode = parse_charge_mode(j.at("mode").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad mode: ") + e.what());
    }
  }
  if (j.contains("slider")) {
    const json& s = j.at("slider");
    check_keys(s, {"kind", "values", "value", "low", "high"}, "slider");
    std::string kind = "stratified";
    read(s, "kind", kind, "slider");
    if (kind == "fixed") {
      double v = 0.5;
      read(s, "value", v, "slider");
      c.slider = SliderDistribution::fixed(v);
    } else if (kind == "uniform") {
      double lo = 0.0, hi = 1.0;
      read(s, "low", lo, "slider");
      read(s, "high", hi, "slider");
      c.slider = SliderDistribution::uniform(lo, hi);
    } else if (kind == "stratified") {
      std::vector<double> v = c.slider.values;
      read(s, "values", v, "slider");
      c.slider = SliderDistribution::stratified(v);
    } else {
      throw ConfigError("slider kind must be fixed, uniform or stratified");
    }
  }
  if (j.contains("agent")) {
    const json& a = j.at("agent");
    check_keys(a, {"alpha", "beta", "phi"}, "agent");
    read(a, "alpha", c.agent.inconvenience_rate, "agent");
    read(a, "beta", c.agent.smoothing_coeff, "agent");
    read(a, "phi", c.agent.degradation_rate, "agent");
  }
  if (j.contains("market")) {
    const json& m = j.at("market");
    check_keys(m, {"deadband", "horizon", "rt_anchor", "replan_every"}, "market");
    read(m, "deadband", c.deadband, "market");
    read(m, "horizon", c.horizon, "market");
    read(m, "replan_every", c.replan_every, "market");
    if (m.contains("rt_anchor")) {
      std::string s;
      read(m, "rt_anchor", s, "market");
      c.rt_anchor = parse_anchor(s);
    }
  }
  if (j.contains("supply")) {
    const json& s = j.at("supply");
    check_keys(s,
               {"base_price", "slope", "feeder_limit", "surcharge", "evening_bump",
                "bump_center_hour", "bump_width_hours"},
               "supply");
    read(s, "base_price", c.supply.hourly.base_price, "supply");
    read(s, "slope", c.supply.hourly.slope, "supply");
    read(s, "feeder_limit", c.supply.hourly.feeder_limit, "supply");
    read(s, "surcharge", c.supply.hourly.surcharge, "supply");
    read(s, "evening_bump", c.supply.evening_bump, "supply");
    read(s, "bump_center_hour", c.supply.bump_center_hour, "supply");
    read(s, "bump_width_hours", c.supply.bump_width_hours, "supply");
  }
  if (j.contains("inflexible")) {
    const json& s = j.at("inflexible");
    check_keys(s, {"houses", "rt_noise"}, "inflexible");
    read(s, "houses", c.houses, "inflexible");
    read(s, "rt_noise", c.rt_noise, "inflexible");
  }
  if (j.contains("inputs")) {
    const json& s = j.at("inputs");
    check_keys(s, {"catalog", "schedules", "schedule_pool"}, "inputs");
    read(s, "catalog", c.catalog_path, "inputs");
    read(s, "schedules", c.schedules_path, "inputs");
    read(s, "schedule_pool", c.schedule_pool, "inputs");
  }
  if (j.contains("metrics")) {
    const json& s = j.at("metrics");
    check_keys(s, {"warmup_days", "convergence_epsilon", "convergence_window"}, "metrics");
    read(s, "warmup_days", c.warmup_days, "metrics");
    read(s, "convergence_epsilon", c.convergence_epsilon, "metrics");
    read(s, "convergence_window", c.convergence_window, "metrics");
  }
  if (j.contains("compare")) {
    const json& s = j.at("compare");
    check_keys(s, {"phi_sweep"}, "compare");
    read(s, "phi_sweep", c.phi_sweep, "compare");
  }
  c.validate();
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

json slider_json(const SliderDistribution& s) {
  switch (s.kind) {
    case SliderDistribution::Kind::Fixed:
      return {{"kind", "fixed"}, {"value", s.values.front()}};
    case SliderDistribution::Kind::Uniform:
      return {{"kind", "uniform"}, {"low", s.low}, {"high", s.high}};
    case SliderDistribution::Kind::Stratified:
      break;
  }
  return {{"kind", "stratified"}, {"values", s.values}};
}

json config_json(const ScenarioConfig& c) {
  return {
      {"days", c.days},
      {"fleet_size", c.fleet_size},
      {"seed", c.seed},
      {"mode", to_string(c.mode)},
      {"slider", slider_json(c.slider)},
      {"agent",
       {{"alpha", c.agent.inconvenience_rate},
        {"beta", c.agent.smoothing_coeff},
        {"phi", c.agent.degradation_rate}}},
      {"market",
       {{"deadband", c.deadband},
        {"horizon", c.horizon},
        {"rt_anchor", anchor_name(c.rt_anchor)},
        {"replan_every", c.replan_every}}},
      {"supply",
       {{"base_price", c.supply.hourly.base_price},
        {"slope", c.supply.hourly.slope},
        {"feeder_limit", c.supply.hourly.feeder_limit},
        {"surcharge", c.supply.hourly.surcharge},
        {"evening_bump", c.supply.evening_bump},
        {"bump_center_hour", c.supply.bump_center_hour},
        {"bump_width_hours", c.supply.bump_width_hours}}},
      {"inflexible", {{"houses", c.houses}, {"rt_noise", c.rt_noise}}},
      {"inputs",
       {{"catalog", c.catalog_path},
        {"schedules", c.schedules_path},
        {"schedule_pool", c.schedule_pool}}},
      {"metrics",
       {{"warmup_days", c.warmup_days},
        {"convergence_epsilon", c.convergence_epsilon},
        {"convergence_window", c.convergence_window}}},
      {"compare", {{"phi_sweep", c.phi_sweep}}},
      {"output_dir", c.output_dir},
      {"parallel", c.parallel},
  };
}

}  // namespace

std::string config_to_json(const ScenarioConfig& config) { return config_json(config).dump(2); }

std::vector<AgentConfig> build_fleet(const ScenarioConfig& config) {
  const auto catalog = config.catalog_path.empty()
                           ? builtin_ev_catalog(config.mode)
                           : load_ev_catalog_file(config.catalog_path, config.mode);
  const auto pool = config.schedules_path.empty()
                        ? synthesize_schedules(static_cast<std::size_t>(config.schedule_pool),
                                               config.seed)
                        : load_schedules_file(config.schedules_path);
  return synthesize_fleet(catalog, pool, static_cast<std::size_t>(config.fleet_size), config.seed,
                          config.slider, config.agent);
}

// ---- time loop ------------------------------------------------------------

RunResult run_market(const ScenarioConfig& cfg, const std::vector<AgentConfig>& fleet,
                     AgentPolicy policy) {
  const int N = cfg.horizon;
  const int total_hours = cfg.days * 24;
  const int first = cfg.warmup_days * 24;
  const int measured = total_hours - first;
  const std::size_t n = fleet.size();

  const InflexibleLoad load(cfg.houses, cfg.rt_noise, cfg.seed);
  PlanSettings ps;
  ps.horizon = N;
  ps.deadband = cfg.deadband;
  ps.policy = policy;
  ps.rt_anchor = cfg.rt_anchor;
  ps.replan_every = cfg.replan_every;
  const Execution exec = cfg.parallel ? Execution::Parallel : Execution::Serial;

  std::vector<AgentRuntime> agents;
  agents.reserve(n);
  for (const auto& a : fleet) agents.emplace_back(a);

  RunResult run;
  run.evolution = PriceEvolution(N);
  RunTrace& tr = run.trace;
  tr.first_hour = first;
  tr.agent_soc.assign(n, std::vector<double>(measured));
  tr.agent_energy.assign(n, std::vector<double>(measured));
  tr.agent_bill.assign(n, 0.0);
  tr.agent_deviation_slots.assign(n, 0);
  run.da_results.reserve(static_cast<std::size_t>(total_hours) * N);

  PriceHistory history;
  std::vector<double> inflex_f(N);
  std::vector<BidCurve> bids(n);

  for (int c = 0; c < total_hours; ++c) {
    for (int t = 0; t < N; ++t) inflex_f[t] = load.forecast(c + t);
    const PriceForecast forecast = forecast_prices(history, inflex_f, cfg.supply, c, N);
    plan_fleet(agents, c, forecast, ps, exec);

    for (int t = 0; t < N; ++t) {
      for (std::size_t i = 0; i < n; ++i) bids[i] = agents[i].bids[t];
      ClearedResult r;
      try {
        r = clear_bids(bids, inflex_f[t], cfg.supply.for_hour(c + t), c + t,
                       MarketKind::DayAhead, t);
      } catch (const MarketError& e) {
        throw SimulationError("day-ahead clearing for hour " + std::to_string(c + t) + ": " +
                                  e.what(),
                              c + t);
      }
      history.record_round(c + t, r.cleared_price);
      run.evolution.record(c + t, r.cleared_price);
      if (t == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          agents[i].da_cleared_q = r.per_agent_q[i];
          agents[i].da_cleared_price = r.cleared_price;
        }
        history.finalize(c, r.cleared_price);
      }
      run.da_results.push_back(std::move(r));
    }

    const bool in_window = c >= first;
    const int row = c - first;
    double hour_inflex = 0.0, hour_ev = 0.0;
    std::vector<double> agent_hour(n, 0.0);
    for (int s = 0; s < kRtSlotsPerHour; ++s) {
      const auto rbids = rt_bids_fleet(agents, s, ps, exec);
      const double inflex_a = load.actual_slot(c, s);
      ClearedResult r;
      try {
        r = clear_bids(rbids, inflex_a, cfg.supply.for_rt_slot(c), c * kRtSlotsPerHour + s,
                       MarketKind::RealTime, 0);
      } catch (const MarketError& e) {
        throw SimulationError("real-time clearing for hour " + std::to_string(c) + " slot " +
                                  std::to_string(s) + ": " + e.what(),
                              c);
      }
      auto actions = control_fleet(agents, r.per_agent_q, c, s, exec);
      hour_inflex += inflex_a;
      for (std::size_t i = 0; i < n; ++i) {
        const double q = actions[i].delivered_kwh;
        hour_ev += q;
        agent_hour[i] += q;
        if (in_window) {
          tr.agent_bill[i] += r.cleared_price * q;
          if (actions[i].deviation) ++tr.agent_deviation_slots[i];
        }
      }
      if (in_window) tr.rt_price.push_back(r.cleared_price);
      run.rt_results.push_back(std::move(r));
      for (auto& a : actions) run.controls.push_back(a);
    }
    if (in_window) {
      tr.substation_load.push_back(hour_inflex + hour_ev);
      tr.ev_load.push_back(hour_ev);
      tr.da_price.push_back(run.evolution.sequence(c).back());
      for (std::size_t i = 0; i < n; ++i) {
        tr.agent_soc[i][row] = agents[i].state.soc;
        tr.agent_energy[i][row] = agent_hour[i];
      }
    }
  }

  int converged = 0;
  for (int h = first; h < total_hours; ++h) {
    if (check_convergence(run.evolution.sequence(h), cfg.convergence_epsilon,
                          cfg.convergence_window))
      ++converged;
    else
      tr.unconverged_hours.push_back(h);
  }
  tr.converged_fraction = measured > 0 ? static_cast<double>(converged) / measured : 1.0;
  run.audit = audit_run(run, fleet);
  return run;
}

AuditReport audit_run(const RunResult& run, const std::vector<AgentConfig>& fleet) {
  AuditReport a;
  const auto check_clearing = [&](const ClearedResult& r) {
    ++a.checked_clearings;
    const double sum = std::accumulate(r.per_agent_q.begin(), r.per_agent_q.end(), r.inflexible);
    if (std::fabs(sum - r.total_quantity) > 1e-9 * std::max(1.0, std::fabs(r.total_quantity)))
      ++a.conservation_violations;
  };
  for (const auto& r : run.da_results) check_clearing(r);
  for (const auto& r : run.rt_results) check_clearing(r);

  std::vector<const AgentConfig*> by_id;
  for (const auto& f : fleet) {
    if (f.agent_id >= static_cast<int>(by_id.size())) by_id.resize(f.agent_id + 1, nullptr);
    by_id[f.agent_id] = &f;
  }
  for (const auto& c : run.controls) {
    ++a.checked_controls;
    const AgentConfig* cfg =
        c.agent_id >= 0 && c.agent_id < static_cast<int>(by_id.size()) ? by_id[c.agent_id] : nullptr;
    if (cfg) {
      const double c_max = cfg->spec.capacity_kwh();
      const double c_min = cfg->spec.min_soc_kwh();
      if (c.floor_breach || c.resulting_soc > c_max + 1e-9 || c.resulting_soc < c_min - 1e-9)
        ++a.soc_violations;
    }
    const bool differs = std::fabs(c.committed_kwh - c.delivered_kwh) > 1e-9;
    if (differs && !c.deviation) ++a.unlogged_deviations;
    if (c.deviation) ++a.logged_deviations;
  }
  return a;
}

double mean_savings(const std::vector<AgentReport>& reports) {
  if (reports.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : reports) s += r.savings_pct;
  return s / static_cast<double>(reports.size());
}

ScenarioOutcome run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioOutcome out;
  out.fleet = build_fleet(config);
  out.base = run_market(config, out.fleet, AgentPolicy::BaseCase);
  out.transactive = run_market(config, out.fleet, AgentPolicy::Transactive);
  out.agents = agent_reports(out.fleet, out.base.trace, out.transactive.trace);
  out.system = system_report(out.base.trace, out.transactive.trace);
  std::vector<double> w, sv, am_w, am;
  for (const auto& r : out.agents) {
    w.push_back(r.slider);
    sv.push_back(r.savings_pct);
    if (r.amenity_pct) {
      am_w.push_back(r.slider);
      am.push_back(*r.amenity_pct);
    }
  }
  out.spearman_savings = spearman(w, sv);
  out.spearman_amenity = spearman(am_w, am);
  return out;
}

// ---- output ---------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_run(const RunResult& run, const std::vector<AgentConfig>& fleet,
               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto f = open_out(dir / "market_log.csv");
    f << "interval,kind,lead_time,cleared_price,total_q,inflexible_q,congested\n";
    const auto put = [&](const ClearedResult& r) {
      f << r.interval << ',' << to_string(r.kind) << ',' << r.lead_time << ','
        << num(r.cleared_price) << ',' << num(r.total_quantity) << ',' << num(r.inflexible) << ','
        << (r.congested ? 1 : 0) << '\n';
    };
    for (const auto& r : run.da_results) put(r);
    for (const auto& r : run.rt_results) put(r);
  }
  {
    auto f = open_out(dir / "commitments.csv");
    f << "interval,kind,agent_id,q_committed\n";
    const auto put = [&](const ClearedResult& r) {
      for (std::size_t i = 0; i < r.per_agent_q.size(); ++i)
        f << r.interval << ',' << to_string(r.kind) << ',' << fleet[i].agent_id << ','
          << num(r.per_agent_q[i]) << '\n';
    };
    for (const auto& r : run.da_results)
      if (r.lead_time == 0) put(r);
    for (const auto& r : run.rt_results) put(r);
  }
  {
    auto f = open_out(dir / "control_trace.csv");
    f << "hour,slot,agent_id,committed_kwh,delivered_kwh,soc,deviation\n";
    for (const auto& c : run.controls)
      f << c.hour << ',' << c.slot << ',' << c.agent_id << ',' << num(c.committed_kwh) << ','
        << num(c.delivered_kwh) << ',' << num(c.resulting_soc) << ',' << (c.deviation ? 1 : 0)
        << '\n';
  }
  {
    auto f = open_out(dir / "price_evolution.csv");
    f << "target_hour,lead_time,price\n";
    for (const auto& [hour, seq] : run.evolution.all()) {
      const int len = static_cast<int>(seq.size());
      for (int k = 0; k < len; ++k) f << hour << ',' << len - 1 - k << ',' << num(seq[k]) << '\n';
    }
  }
  {
    auto f = open_out(dir / "hourly.csv");
    f << "hour,substation_kwh,ev_kwh,da_price\n";
    const auto& t = run.trace;
    for (std::size_t h = 0; h < t.substation_load.size(); ++h)
      f << t.first_hour + static_cast<int>(h) << ',' << num(t.substation_load[h]) << ','
        << num(t.ev_load[h]) << ',' << num(t.da_price[h]) << '\n';
  }
}

json audit_json(const AuditReport& a) {
  return {{"ok", a.ok()},
          {"soc_violations", a.soc_violations},
          {"conservation_violations", a.conservation_violations},
          {"unlogged_deviations", a.unlogged_deviations},
          {"logged_deviations", a.logged_deviations},
          {"checked_clearings", a.checked_clearings},
          {"checked_controls", a.checked_controls}};
}

}  // namespace

void write_outputs(const ScenarioOutcome& o, const ScenarioConfig& config, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  write_run(o.base, o.fleet, root / "base");
  write_run(o.transactive, o.fleet, root / "transactive");
  {
    auto f = open_out(root / "agents.csv");
    f << "agent_id,model,slider,arrival_hour,departure_hour,charger_kw,daily_miles,bill_base,"
         "bill_transactive,savings_pct,amenity_pct\n";
    for (std::size_t i = 0; i < o.agents.size(); ++i) {
      const auto& r = o.agents[i];
      f << r.agent_id << ',' << o.fleet[i].spec.model_name << ',' << num(r.slider) << ','
        << r.arrival_hour << ',' << o.fleet[i].schedule.t_out << ',' << num(r.charger_kw) << ','
        << num(r.daily_miles) << ',' << num(r.total_bill_base) << ','
        << num(r.total_bill_transactive) << ',' << num(r.savings_pct) << ','
        << (r.amenity_pct ? num(*r.amenity_pct) : std::string("NA")) << '\n';
    }
  }
  const auto& s = o.system;
  json summary = {
      {"config", config_json(config)},
      {"system",
       {{"peak_load_base_kw", s.peak_load_base},
        {"peak_load_transactive_kw", s.peak_load_transactive},
        {"peak_price_base", s.peak_price_base},
        {"peak_price_transactive", s.peak_price_transactive},
        {"ev_variance_base", s.ev_variance_base},
        {"ev_variance_transactive", s.ev_variance_transactive},
        {"converged_fraction", s.converged_fraction}}},
      {"spearman_slider_savings", o.spearman_savings},
      {"spearman_slider_amenity", o.spearman_amenity},
      {"mean_savings_pct", mean_savings(o.agents)},
      {"audit", {{"base", audit_json(o.base.audit)}, {"transactive", audit_json(o.transactive.audit)}}},
  };
  auto f = open_out(root / "summary.json");
  f << summary.dump(2) << '\n';
}

std::vector<ModeComparisonRow> compare_modes(const ScenarioConfig& config) {
  config.validate();
  ScenarioConfig v1 = config, v2 = config;
  v1.mode = ChargeMode::V1G;
  v2.mode = ChargeMode::V2G;
  const auto fleet1 = build_fleet(v1);
  const auto fleet2 = build_fleet(v2);
  const RunResult base = run_market(v1, fleet1, AgentPolicy::BaseCase);
  const double base_peak = system_report(base.trace, base.trace).peak_load_base;

  std::vector<ModeComparisonRow> rows;
  for (double phi : config.phi_sweep) {
    auto f1 = fleet1, f2 = fleet2;
    for (auto& a : f1) a.degradation_rate = phi;
    for (auto& a : f2) a.degradation_rate = phi;
    const RunResult r1 = run_market(v1, f1, AgentPolicy::Transactive);
    const RunResult r2 = run_market(v2, f2, AgentPolicy::Transactive);
    ModeComparisonRow row;
    row.phi = phi;
    row.savings_v1g = mean_savings(agent_reports(f1, base.trace, r1.trace));
    row.savings_v2g = mean_savings(agent_reports(f2, base.trace, r2.trace));
    row.delta_savings = row.savings_v2g - row.savings_v1g;
    const auto peak = [&](const RunResult& r) {
      return 100.0 * (base_peak - system_report(base.trace, r.trace).peak_load_transactive) /
             base_peak;
    };
    row.peak_reduction_v1g = peak(r1);
    row.peak_reduction_v2g = peak(r2);
    row.delta_peak_reduction = row.peak_reduction_v2g - row.peak_reduction_v1g;
    row.audits_ok = base.audit.ok() && r1.audit.ok() && r2.audit.ok();
    rows.push_back(row);
  }
  return rows;
}

void write_mode_comparison(const std::vector<ModeComparisonRow>& rows, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto f = open_out(std::filesystem::path(dir) / "mode_comparison.csv");
  f << "phi,savings_v1g_pct,savings_v2g_pct,delta_savings_pct,peak_reduction_v1g_pct,"
       "peak_reduction_v2g_pct,delta_peak_reduction_pct,audits_ok\n";
  for (const auto& r : rows)
    f << num(r.phi) << ',' << num(r.savings_v1g) << ',' << num(r.savings_v2g) << ','
      << num(r.delta_savings) << ',' << num(r.peak_reduction_v1g) << ','
      << num(r.peak_reduction_v2g) << ',' << num(r.delta_peak_reduction) << ','
      << (r.audits_ok ? 1 : 0) << '\n';
}

}  // namespace tev
