#include "tev/bidding.hpp"

#include <algorithm>
#include <stdexcept>

namespace tev {

namespace {

constexpr double kQtyTol = 1e-7;

// Metered quantity range of a charger: export is reduced by the discharge
// efficiency, import inflated by the charge efficiency.
double metered_export_limit(const EvSpec& spec) { return spec.discharge_kw * spec.eta_out; }
double metered_import_limit(const EvSpec& spec) { return spec.charge_kw / spec.eta_in; }

double lerp_price(double p, const BidPoint& a, const BidPoint& b) {
  return a.quantity + (p - a.price) * (b.quantity - a.quantity) / (b.price - a.price);
}

BidCurve build_curve(double q_anchor, double p_anchor, double slope, double deadband, double q_min,
                     double q_max) {
  BidCurve bid;
  bid.flexible = true;
  bid.deadband = deadband;
  bid.slope = slope;
  bid.intercept = p_anchor - slope * q_anchor;
  bid.points[0] = {q_min * slope + bid.intercept + deadband, q_min};
  bid.points[1] = {q_anchor * slope + bid.intercept + deadband, q_anchor};
  bid.points[2] = {q_anchor * slope + bid.intercept - deadband, q_anchor};
  // The fourth point keeps the third point's price.
  bid.points[3] = {bid.points[2].price, q_max};
  return bid;
}

BidCurve vertical_curve(double q, double price, double deadband) {
  BidCurve bid;
  bid.flexible = false;
  bid.deadband = deadband;
  bid.slope = 0.0;
  bid.intercept = price;
  bid.points[0] = {price + deadband, q};
  bid.points[1] = {price + deadband, q};
  bid.points[2] = {price - deadband, q};
  bid.points[3] = {price - deadband, q};
  return bid;
}

}  // namespace

BidSlope bid_slope(std::span<const double> forecast, double omega, const EvSpec& spec) {
  if (forecast.empty()) throw std::invalid_argument("empty forecast");
  if (omega <= 0.0) return {0.0, false};
  const auto [lo, hi] = std::minmax_element(forecast.begin(), forecast.end());
  const double span = *hi - *lo;
  const double range = metered_export_limit(spec) + metered_import_limit(spec);
  if (!(range > 0)) throw std::invalid_argument("charger has no quantity range");
  if (span == 0.0) return {0.0, true};
  return {(span / -range) / omega, false};
}

BidCurve four_point_bid(double q_plan, double p_forecast, double slope, double deadband,
                        const EvSpec& spec, double omega) {
  if (deadband < 0) throw std::invalid_argument("negative deadband");
  const double q_min = -metered_export_limit(spec);
  const double q_max = metered_import_limit(spec);
  if (q_plan < q_min - kQtyTol || q_plan > q_max + kQtyTol)
    throw std::invalid_argument("planned quantity outside the charger range");
  q_plan = std::clamp(q_plan, q_min, q_max);
  if (omega <= 0.0) return vertical_curve(q_plan, p_forecast, deadband);
  return build_curve(q_plan, p_forecast, slope, deadband, q_min, q_max);
}

BidCurve inflexible_bid(double quantity, double price, const EvSpec&) {
  return vertical_curve(quantity, price, 0.0);
}

QuantityRange quantity_range_at_price(const BidCurve& bid, double p) {
  const auto& [b1, b2, b3, b4] = bid.points;
  if (!bid.flexible) return {b2.quantity, b2.quantity};

  QuantityRange r;
  // Limit from above: ties resolve toward the higher-price side.
  if (p >= b1.price) {
    r.at_higher = b1.quantity;
  } else if (p >= b2.price) {
    r.at_higher = lerp_price(p, b1, b2);
  } else if (p >= b3.price) {
    r.at_higher = b2.quantity;
  } else if (p >= b4.price) {
    r.at_higher = lerp_price(p, b3, b4);
  } else {
    r.at_higher = b4.quantity;
  }
  // Limit from below.
  if (p > b1.price) {
    r.at_lower = b1.quantity;
  } else if (p > b2.price) {
    r.at_lower = lerp_price(p, b1, b2);
  } else if (p > b3.price) {
    r.at_lower = b2.quantity;
  } else if (p > b4.price) {
    r.at_lower = lerp_price(p, b3, b4);
  } else {
    r.at_lower = b4.quantity;
  }
  return r;
}

double quantity_at_price(const BidCurve& bid, double price) {
  return quantity_range_at_price(bid, price).at_higher;
}

BidCurve rt_bid(double da_cleared_q, double q_plan_next_hour, int minute_slot,
                const BidCurve& hour_bid, std::optional<double> anchor_price) {
  if (minute_slot < 0 || minute_slot >= kRtSlotsPerHour)
    throw std::invalid_argument("RT slot out of range");
  const double frac = static_cast<double>(minute_slot) / kRtSlotsPerHour;
  const double q_min = hour_bid.min_quantity();
  const double q_max = hour_bid.max_quantity();
  double anchor = da_cleared_q + frac * (q_plan_next_hour - da_cleared_q);
  const double price = anchor_price.value_or(hour_bid.anchor_price());

  BidCurve hourly;
  if (!hour_bid.flexible) {
    hourly = vertical_curve(anchor, price, hour_bid.deadband);
  } else {
    anchor = std::clamp(anchor, q_min, q_max);
    hourly = build_curve(anchor, price, hour_bid.slope, hour_bid.deadband, q_min, q_max);
  }
  return scale_quantities(hourly, 1.0 / kRtSlotsPerHour);
}

BidCurve scale_quantities(const BidCurve& bid, double factor) {
  BidCurve out = bid;
  for (auto& pt : out.points) pt.quantity *= factor;
  if (factor != 0.0) out.slope = bid.slope / factor;
  return out;
}

}  // namespace tev
