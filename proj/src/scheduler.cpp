#include "tev/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;

std::vector<double> hourly_drain(const AgentConfig& agent, const HorizonSets& sets) {
  const double half = half_trip_kwh(agent.schedule, agent.spec);
  std::vector<double> drain(sets.horizon_len, 0.0);
  for (int t = 0; t < sets.horizon_len; ++t) {
    if (sets.kinds[t] == HourKind::Arrival || sets.kinds[t] == HourKind::Departure) drain[t] = half;
  }
  return drain;
}

}  // namespace

double PriceForecast::max() const { return *std::max_element(prices.begin(), prices.end()); }
double PriceForecast::min() const { return *std::min_element(prices.begin(), prices.end()); }

std::vector<double> max_reachable_soc(const AgentConfig& agent, const HorizonSets& sets,
                                      double initial_soc) {
  const double c_max = agent.spec.capacity_kwh();
  const auto drain = hourly_drain(agent, sets);
  std::vector<double> path(sets.horizon_len);
  double soc = initial_soc;
  for (int t = 0; t < sets.horizon_len; ++t) {
    soc -= drain[t];
    if (sets.transactive[t]) soc = std::min(c_max, soc + agent.spec.charge_kw);
    path[t] = soc;
  }
  return path;
}

ScheduleQp build_qp(const AgentConfig& agent, const HorizonSets& sets, const PriceForecast& forecast,
                    double initial_soc, DepartureRule rule) {
  const int N = sets.horizon_len;
  if (static_cast<int>(forecast.prices.size()) != N)
    throw std::invalid_argument("forecast length does not match the horizon");
  const EvSpec& spec = agent.spec;
  const double c_max = spec.capacity_kwh();
  const double c_min = spec.min_soc_kwh();
  if (initial_soc > c_max + kFeasTol || initial_soc < c_min - kFeasTol)
    throw std::invalid_argument("initial SOC outside battery bounds");

  ScheduleQp out;
  out.start_hour = sets.start_hour;
  out.horizon_len = N;
  out.spec = spec;
  out.initial_soc = initial_soc;

  const auto drain = hourly_drain(agent, sets);
  out.cumulative_drain.resize(N);
  double acc = 0.0;
  for (int t = 0; t < N; ++t) out.cumulative_drain[t] = (acc += drain[t]);

  // Feasibility screen against the full-rate charging path.
  const auto reach = max_reachable_soc(agent, sets, initial_soc);
  std::vector<double> floor(N, c_min);
  for (int t = 0; t < N; ++t) {
    if (reach[t] < c_min - kFeasTol) {
      if (rule == DepartureRule::Strict) {
        std::ostringstream os;
        os << "SOC cannot stay above its floor at horizon hour " << t << " (absolute "
           << sets.start_hour + t << ")";
        throw InfeasibleHorizon(os.str(), t, c_min - reach[t]);
      }
      floor[t] = reach[t];
    }
  }
  for (int td : sets.departure_hours) {
    if (td < 1) continue;  // the SOC entering hour 0 is given, not decided
    double target = c_max;
    if (reach[td - 1] < c_max - kFeasTol) {
      if (rule == DepartureRule::Strict) {
        std::ostringstream os;
        os << "cannot reach full charge before departure at horizon hour " << td << " (absolute "
           << sets.start_hour + td << "), short by " << c_max - reach[td - 1] << " kWh";
        throw InfeasibleHorizon(os.str(), td, c_max - reach[td - 1]);
      }
      target = reach[td - 1];
    }
    out.departure_hours.push_back(td);
    out.departure_targets.push_back(target);
  }

  const int n = 2 * N;
  DenseQp qp(n);
  const double w = agent.slider;
  const double alpha = agent.inconvenience_rate;
  const double beta = agent.smoothing_coeff;
  const double phi = agent.degradation_rate;
  const double a_in = 1.0 / spec.eta_in;  // metered kWh per battery kWh charged
  const double a_out = spec.eta_out;      // metered kWh per battery kWh discharged

  for (int t = 0; t < N; ++t) {
    const int i = out.in_index(t), o = out.out_index(t);
    qp.lower[i] = qp.lower[o] = 0.0;
    qp.upper[i] = sets.transactive[t] ? spec.charge_kw : 0.0;
    qp.upper[o] = sets.transactive[t] ? spec.discharge_kw : 0.0;

    // beta * (metered in + metered out)^2, in 0.5 x'Hx form
    qp.hessian(i, i) = 2.0 * beta * a_in * a_in;
    qp.hessian(o, o) = 2.0 * beta * a_out * a_out;
    qp.hessian(i, o) = qp.hessian(o, i) = 2.0 * beta * a_in * a_out;

    // Energy cost and degradation, weighted by the slider. The amenity deficit
    // sum(C_max - C(t)) credits each charged kWh once per remaining hour.
    const double remaining = static_cast<double>(N - t);
    qp.linear[i] = w * a_in * (forecast.prices[t] + phi) - (1.0 - w) * alpha * remaining;
    qp.linear[o] = w * a_out * (phi - forecast.prices[t]) + (1.0 - w) * alpha * remaining;
  }
  double deficit0 = 0.0;
  for (int t = 0; t < N; ++t) deficit0 += c_max - initial_soc + out.cumulative_drain[t];
  qp.constant = (1.0 - w) * alpha * deficit0;

  std::vector<char> departs_next(N, 0);
  std::vector<double> target_next(N, c_max);
  for (std::size_t k = 0; k < out.departure_hours.size(); ++k) {
    departs_next[out.departure_hours[k] - 1] = 1;
    target_next[out.departure_hours[k] - 1] = out.departure_targets[k];
  }

  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  for (int t = 0; t < N; ++t) {
    row[out.in_index(t)] = 1.0;
    row[out.out_index(t)] = -1.0;
    const double offset = out.cumulative_drain[t] - initial_soc;
    if (departs_next[t]) {
      qp.add_equality(row, target_next[t] + offset);
      qp.add_inequality(row, floor[t] + offset, kInf);
    } else {
      qp.add_inequality(row, floor[t] + offset, c_max + offset);
    }
  }
  out.qp = std::move(qp);
  return out;
}

Schedule solve_qp(const ScheduleQp& problem, const QpSettings& settings) {
  const QpResult res = solve_dense_qp(problem.qp, settings);
  const auto residual = constraint_residuals(problem.qp, res.x);
  if (residual.max() > 1e-8) {
    throw QpSolveError("schedule violates constraints by " + std::to_string(residual.max()) + " kWh", res);
  }
  const int N = problem.horizon_len;
  Schedule s;
  s.start_hour = problem.start_hour;
  s.e_in.resize(N);
  s.e_out.resize(N);
  s.q_plan.resize(N);
  s.soc_traj.resize(N);
  double cum = 0.0;
  for (int t = 0; t < N; ++t) {
    s.e_in[t] = res.x[problem.in_index(t)];
    s.e_out[t] = res.x[problem.out_index(t)];
    s.q_plan[t] = metered_energy(s.e_in[t], s.e_out[t], problem.spec).net();
    cum += s.e_in[t] - s.e_out[t];
    s.soc_traj[t] = problem.initial_soc - problem.cumulative_drain[t] + cum;
  }
  s.objective_value = res.objective;
  s.solver_iterations = res.iterations;
  return s;
}

Schedule optimal_schedule(const AgentConfig& agent, const HorizonSets& sets,
                          const PriceForecast& forecast, double initial_soc,
                          const QpSettings& settings, DepartureRule rule) {
  return solve_qp(build_qp(agent, sets, forecast, initial_soc, rule), settings);
}

Schedule greedy_full_charge(const AgentConfig& agent, const HorizonSets& sets, double initial_soc) {
  const int N = sets.horizon_len;
  const double c_max = agent.spec.capacity_kwh();
  const auto drain = hourly_drain(agent, sets);
  Schedule s;
  s.start_hour = sets.start_hour;
  s.e_in.assign(N, 0.0);
  s.e_out.assign(N, 0.0);
  s.q_plan.assign(N, 0.0);
  s.soc_traj.assign(N, 0.0);
  double soc = initial_soc;
  for (int t = 0; t < N; ++t) {
    soc -= drain[t];
    if (sets.transactive[t]) {
      const double e = std::clamp(c_max - soc, 0.0, agent.spec.charge_kw);
      s.e_in[t] = e;
      s.q_plan[t] = metered_energy(e, 0.0, agent.spec).net();
      soc += e;
    }
    s.soc_traj[t] = soc;
  }
  return s;
}

}  // namespace tev
