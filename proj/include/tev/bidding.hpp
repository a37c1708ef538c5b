#pragma once

#include <array>
#include <optional>
#include <span>

#include "tev/ev_model.hpp"

namespace tev {

struct BidPoint {
  double price = 0.0;     // $/kWh
  double quantity = 0.0;  // kWh (metered, positive = import)
};

/// Four-point demand bid for one interval. Carries prices and quantities
/// only: nothing about the owner's preferences or the battery state leaves
/// the agent through this type.
struct BidCurve {
  std::array<BidPoint, 4> points{};
  double deadband = 0.0;
  double slope = 0.0;      // $/kWh per kWh, <= 0
  double intercept = 0.0;  // $/kWh
  bool flexible = true;

  double planned_quantity() const { return points[1].quantity; }
  double min_quantity() const { return points[0].quantity; }
  double max_quantity() const { return points[3].quantity; }
  /// Price at the middle of the deadband (where the plan was anchored).
  double anchor_price() const { return 0.5 * (points[1].price + points[2].price); }
};

struct BidSlope {
  double value = 0.0;
  bool flat = false;  // constant forecast: zero slope, step-shaped curve
};

/// Slope shared by all hourly bids of one agent: the forecast price spread
/// over the full quantity range, stretched by 1/omega.
BidSlope bid_slope(std::span<const double> forecast, double omega, const EvSpec& spec);

/// Builds the bid around a planned quantity. omega == 0 yields an inflexible
/// (vertical) bid at the plan.
BidCurve four_point_bid(double q_plan, double p_forecast, double slope, double deadband,
                        const EvSpec& spec, double omega);

/// Vertical bid at a fixed quantity (non-participating or unplugged hours).
BidCurve inflexible_bid(double quantity, double price, const EvSpec& spec);

/// Quantity demanded at a price; monotone non-increasing. At a price where
/// the curve is horizontal (P3 == P4, or P1 == P2 on a flat forecast) this
/// returns the right-hand limit; `quantity_range_at_price` gives both limits.
double quantity_at_price(const BidCurve& bid, double price);

struct QuantityRange {
  double at_higher = 0.0;  // limit as price decreases to p from above
  double at_lower = 0.0;   // limit as price increases to p from below
};
QuantityRange quantity_range_at_price(const BidCurve& bid, double price);

inline constexpr int kRtSlotsPerHour = 12;

/// Five-minute bid derived from the hour's bid: same slope and deadband,
/// re-anchored at a quantity interpolated from the day-ahead cleared
/// quantity toward the next hour's plan. The returned curve is in per-slot
/// energy (hourly quantities / 12, slope * 12). `anchor_price` defaults to
/// the hour bid's deadband centre.
BidCurve rt_bid(double da_cleared_q, double q_plan_next_hour, int minute_slot,
                const BidCurve& hour_bid, std::optional<double> anchor_price = std::nullopt);

/// Uniformly rescales quantities (prices unchanged, slope adjusted).
BidCurve scale_quantities(const BidCurve& bid, double factor);

}  // namespace tev
