#include "tev/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tev/scheduler.hpp"

namespace tev {

BaseCaseTrace base_case_sim(const AgentConfig& agent, const std::vector<double>& price_trace,
                            int start_hour, double initial_soc) {
  const int n = static_cast<int>(price_trace.size());
  const HorizonSets sets = horizon_sets(agent.schedule, start_hour, n);
  const Schedule plan = greedy_full_charge(agent, sets, initial_soc);
  BaseCaseTrace out;
  out.energy_in = plan.e_in;
  out.metered = plan.q_plan;
  out.soc = plan.soc_traj;
  for (int t = 0; t < n; ++t) out.bill += price_trace[t] * plan.q_plan[t];
  return out;
}

double savings(double bill_trans, double bill_base) {
  if (bill_base == 0.0) return 0.0;
  return 100.0 * (bill_base - bill_trans) / bill_base;
}

std::optional<double> amenity(const std::vector<double>& soc_trans,
                              const std::vector<double>& soc_base, double c_max, double eps_full) {
  const auto full = [&](const std::vector<double>& v) {
    return std::count_if(v.begin(), v.end(), [&](double s) { return s >= c_max - eps_full; });
  };
  const auto base = full(soc_base);
  if (base == 0) return std::nullopt;
  return 100.0 * static_cast<double>(full(soc_trans)) / static_cast<double>(base);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  return pearson(average_ranks(x), average_ranks(y));
}

double variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

std::vector<AgentReport> agent_reports(const std::vector<AgentConfig>& agents,
                                       const RunTrace& base, const RunTrace& trans) {
  std::vector<AgentReport> out;
  out.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    AgentReport r;
    r.agent_id = a.agent_id;
    r.slider = a.slider;
    r.arrival_hour = a.schedule.t_in;
    r.charger_kw = a.spec.charge_kw;
    r.daily_miles = a.schedule.daily_miles;
    r.total_bill_base = base.agent_bill[i];
    r.total_bill_transactive = trans.agent_bill[i];
    r.savings_pct = savings(r.total_bill_transactive, r.total_bill_base);
    const double c_max = a.spec.capacity_kwh();
    r.amenity_pct =
        amenity(trans.agent_soc[i], base.agent_soc[i], c_max, kFullChargeFraction * c_max);
    out.push_back(r);
  }
  return out;
}

SystemReport system_report(const RunTrace& base, const RunTrace& trans) {
  SystemReport r;
  r.peak_load_base = max_of(base.substation_load);
  r.peak_load_transactive = max_of(trans.substation_load);
  r.peak_price_base = max_of(base.rt_price);
  r.peak_price_transactive = max_of(trans.rt_price);
  r.ev_variance_base = variance(base.ev_load);
  r.ev_variance_transactive = variance(trans.ev_load);
  r.load_profile_base = base.substation_load;
  r.load_profile_transactive = trans.substation_load;
  r.converged_fraction = trans.converged_fraction;
  return r;
}

}  // namespace tev
