#include "tev/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tev/errors.hpp"

namespace tev {

void SupplyCurve::validate() const {
  if (!(slope >= 0)) throw ConfigError("supply slope must be >= 0");
  if (!(feeder_limit > 0)) throw ConfigError("feeder limit must be > 0");
  if (!(surcharge >= 0)) throw ConfigError("congestion surcharge must be >= 0");
  if (!(base_price > 0)) throw ConfigError("supply base price must be > 0");
}

SupplyCurve SupplyModel::for_hour(int hour) const {
  const double hod = static_cast<double>(((hour % 24) + 24) % 24);
  double d = std::fabs(hod - bump_center_hour);
  d = std::min(d, 24.0 - d);
  SupplyCurve s = hourly;
  s.base_price = hourly.base_price * (1.0 + evening_bump * std::exp(-0.5 * (d / bump_width_hours) *
                                                                    (d / bump_width_hours)));
  return s;
}

SupplyCurve SupplyModel::for_rt_slot(int hour) const {
  SupplyCurve s = for_hour(hour);
  s.slope *= kRtSlotsPerHour;
  s.feeder_limit /= kRtSlotsPerHour;
  return s;
}

void SupplyModel::validate() const {
  hourly.validate();
  if (!(evening_bump >= 0)) throw ConfigError("evening bump must be >= 0");
  if (!(bump_width_hours > 0)) throw ConfigError("bump width must be > 0");
}

// ---- demand ---------------------------------------------------------------

DemandCurve::DemandCurve(std::vector<Breakpoint> breakpoints, double inflexible, double max_total)
    : breakpoints_(std::move(breakpoints)), inflexible_(inflexible), max_total_(max_total) {}

QuantityRange DemandCurve::range_at(double p) const {
  if (breakpoints_.empty()) return {inflexible_, inflexible_};
  const auto& bp = breakpoints_;
  if (p > bp.front().price) return {bp.front().at_higher, bp.front().at_higher};
  if (p < bp.back().price) return {bp.back().at_lower, bp.back().at_lower};
  // First breakpoint with price <= p (prices are decreasing).
  const auto it = std::lower_bound(bp.begin(), bp.end(), p,
                                   [](const Breakpoint& b, double x) { return b.price > x; });
  if (it->price == p) return {it->at_higher, it->at_lower};
  const Breakpoint& hi = *(it - 1);
  const Breakpoint& lo = *it;
  const double q =
      hi.at_lower + (p - hi.price) * (lo.at_higher - hi.at_lower) / (lo.price - hi.price);
  return {q, q};
}

double DemandCurve::quantity_at(double price) const { return range_at(price).at_higher; }

DemandCurve aggregate_demand(const std::vector<BidCurve>& bids, double inflexible) {
  std::vector<double> prices;
  prices.reserve(4 * bids.size());
  double max_total = inflexible;
  for (const auto& b : bids) {
    for (const auto& pt : b.points) prices.push_back(pt.price);
    max_total += b.flexible ? b.max_quantity() : b.planned_quantity();
  }
  std::sort(prices.begin(), prices.end(), std::greater<>());
  prices.erase(std::unique(prices.begin(), prices.end()), prices.end());

  std::vector<DemandCurve::Breakpoint> bps;
  bps.reserve(prices.size());
  for (double p : prices) {
    DemandCurve::Breakpoint bp{p, inflexible, inflexible};
    for (const auto& b : bids) {
      const auto r = quantity_range_at_price(b, p);
      bp.at_higher += r.at_higher;
      bp.at_lower += r.at_lower;
    }
    bps.push_back(bp);
  }
  return DemandCurve(std::move(bps), inflexible, max_total);
}

// ---- clearing -------------------------------------------------------------

namespace {

ClearPoint intersect(const DemandCurve& demand, const SupplyCurve& supply) {
  const double a = supply.base_price;
  const double b = supply.slope;
  const auto& bp = demand.breakpoints();

  if (b == 0.0) return {a, demand.quantity_at(a), false, 0.0};
  if (bp.empty()) {
    const double q = demand.inflexible_load();
    return {a + b * q, q, false, 0.0};
  }
  const auto supply_q = [&](double p) { return (p - a) / b; };

  // Above the highest corner every bid is at its smallest quantity.
  {
    const double q = bp.front().at_higher;
    const double p = a + b * q;
    if (p > bp.front().price) return {p, q, false, 0.0};
  }
  for (std::size_t k = 0; k < bp.size(); ++k) {
    const double pk = bp[k].price;
    const double s = supply_q(pk);
    const double hi = bp[k].at_higher, lo = bp[k].at_lower;
    const double tol = 1e-12 * std::max(1.0, std::fabs(s));
    if (s >= hi - tol && s <= lo + tol) {
      const double width = lo - hi;
      const double fill = width > 1e-12 ? std::clamp((s - hi) / width, 0.0, 1.0) : 0.0;
      return {pk, hi + fill * width, false, fill};
    }
    if (k + 1 < bp.size()) {
      const double pn = bp[k + 1].price;
      if (lo < s && bp[k + 1].at_higher > supply_q(pn)) {
        // Linear demand segment between the two corners meets the supply line.
        const double m = (bp[k + 1].at_higher - lo) / (pn - pk);
        double p = (b * lo - b * m * pk + a) / (1.0 - b * m);
        p = std::clamp(p, pn, pk);
        return {p, supply_q(p), false, 0.0};
      }
    }
  }
  // Below the lowest corner every bid is at its largest quantity.
  const double q = bp.back().at_lower;
  return {a + b * q, q, false, 0.0};
}

}  // namespace

ClearPoint clear(const DemandCurve& demand, const SupplyCurve& supply) {
  ClearPoint cp = intersect(demand, supply);
  const double p_max = 10.0 * supply.base_price + supply.slope * demand.max_total();
  if (!(cp.price >= 0.0) || cp.price > p_max) {
    std::ostringstream os;
    os << "no supply/demand intersection in [0, " << p_max << "] $/kWh (got " << cp.price << ")";
    throw MarketError(os.str());
  }
  if (cp.quantity > supply.feeder_limit) {
    cp.congested = true;
    cp.price += supply.surcharge;
    cp.quantity = demand.quantity_at(cp.price);
    cp.fill = 0.0;
  }
  return cp;
}

const char* to_string(MarketKind kind) { return kind == MarketKind::DayAhead ? "DA" : "RT"; }

ClearedResult clear_bids(const std::vector<BidCurve>& bids, double inflexible,
                         const SupplyCurve& supply, int interval, MarketKind kind, int lead_time) {
  const DemandCurve demand = aggregate_demand(bids, inflexible);
  const ClearPoint cp = clear(demand, supply);
  ClearedResult r;
  r.interval = interval;
  r.kind = kind;
  r.lead_time = lead_time;
  r.cleared_price = cp.price;
  r.inflexible = inflexible;
  r.congested = cp.congested;
  r.per_agent_q.resize(bids.size());
  double total = inflexible;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const auto range = quantity_range_at_price(bids[i], cp.price);
    r.per_agent_q[i] = range.at_higher + cp.fill * (range.at_lower - range.at_higher);
    total += r.per_agent_q[i];
  }
  r.total_quantity = total;
  return r;
}

// ---- forecasting ----------------------------------------------------------

void PriceHistory::record_round(int hour, double price) { latest_[hour] = price; }

void PriceHistory::finalize(int hour, double price) {
  latest_[hour] = price;
  auto& slot = ema_[((hour % 24) + 24) % 24];
  slot = slot ? decay_ * *slot + (1.0 - decay_) * price : price;
}

std::optional<double> PriceHistory::latest(int hour) const {
  const auto it = latest_.find(hour);
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> PriceHistory::hour_of_day_average(int hour_of_day) const {
  return ema_[((hour_of_day % 24) + 24) % 24];
}

PriceForecast forecast_prices(const PriceHistory& history,
                              const std::vector<double>& inflexible_forecast,
                              const SupplyModel& supply, int start, int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast horizon must be >= 1");
  if (static_cast<int>(inflexible_forecast.size()) < horizon)
    throw std::invalid_argument("inflexible forecast shorter than the horizon");
  PriceForecast f;
  f.start_hour = start;
  f.prices.resize(horizon);
  for (int t = 0; t < horizon; ++t) {
    const int h = start + t;
    if (auto p = history.latest(h)) {
      f.prices[t] = *p;
    } else if (auto e = history.hour_of_day_average(h)) {
      f.prices[t] = *e;
    } else {
      f.prices[t] = supply.for_hour(h).price_at(inflexible_forecast[t]);
    }
  }
  return f;
}

void PriceEvolution::record(int target_hour, double price) {
  auto& seq = seqs_[target_hour];
  seq.push_back(price);
  if (static_cast<int>(seq.size()) > horizon_) seq.erase(seq.begin());
}

const std::vector<double>& PriceEvolution::sequence(int target_hour) const {
  static const std::vector<double> kEmpty;
  const auto it = seqs_.find(target_hour);
  return it == seqs_.end() ? kEmpty : it->second;
}

bool check_convergence(const std::vector<double>& sequence, double epsilon, int k) {
  if (k < 2) throw std::invalid_argument("convergence window must be >= 2");
  if (static_cast<int>(sequence.size()) < k) return false;
  const auto first = sequence.end() - k;
  const auto [lo, hi] = std::minmax_element(first, sequence.end());
  return *hi - *lo < epsilon;
}

}  // namespace tev
