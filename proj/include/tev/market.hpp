#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tev/bidding.hpp"
#include "tev/scheduler.hpp"

namespace tev {

/// Affine wholesale supply for one interval: price = a + b * Q.
struct SupplyCurve {
  double base_price = 0.035;   // a, $/kWh
  double slope = 2e-4;         // b, $/kWh per kWh
  double feeder_limit = 1e9;   // Q_max, kWh per interval
  double surcharge = 0.05;     // s, $/kWh

  double price_at(double quantity) const { return base_price + slope * quantity; }
  void validate() const;
};

/// Diurnal supply: the base price is lifted by `evening_bump` at its peak,
/// a smooth bump centred on `bump_center_hour`.
struct SupplyModel {
  SupplyCurve hourly;
  double evening_bump = 1.0;
  double bump_center_hour = 19.0;
  double bump_width_hours = 2.5;

  /// Supply for an absolute hour, in hourly energy units.
  SupplyCurve for_hour(int hour) const;
  /// Supply for one real-time slot of that hour: quantities per slot, so the
  /// slope is multiplied and the feeder limit divided by the slot count.
  SupplyCurve for_rt_slot(int hour) const;
  void validate() const;
};

/// Aggregate demand: inflexible load plus the sum of bid curves. The function
/// is linear between consecutive corner prices and may jump at a corner.
class DemandCurve {
 public:
  struct Breakpoint {
    double price = 0.0;
    double at_higher = 0.0;  // total quantity just above the price
    double at_lower = 0.0;   // total quantity just below the price
  };

  DemandCurve() = default;
  DemandCurve(std::vector<Breakpoint> breakpoints, double inflexible, double max_total);

  /// Breakpoints sorted by decreasing price.
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  double inflexible_load() const { return inflexible_; }
  /// Total quantity when every bid sits at its largest quantity.
  double max_total() const { return max_total_; }

  /// Right-hand limit convention, matching quantity_at_price.
  double quantity_at(double price) const;
  QuantityRange range_at(double price) const;

 private:
  std::vector<Breakpoint> breakpoints_;
  double inflexible_ = 0.0;
  double max_total_ = 0.0;
};

DemandCurve aggregate_demand(const std::vector<BidCurve>& bids, double inflexible);

struct ClearPoint {
  double price = 0.0;
  double quantity = 0.0;
  bool congested = false;
  /// Position inside a demand jump at the clearing price: 0 takes every
  /// bid's quantity just above the price, 1 the quantity just below.
  double fill = 0.0;
};

/// Intersects demand with supply. Exact for piecewise-linear demand against
/// affine supply. When the intersection exceeds the feeder limit the price
/// is raised once by the surcharge and quantities re-read at that price.
/// Throws MarketError if the intersection lies outside
/// [0, 10 a + b * max_total].
ClearPoint clear(const DemandCurve& demand, const SupplyCurve& supply);

enum class MarketKind { DayAhead, RealTime };
const char* to_string(MarketKind kind);

struct ClearedResult {
  int interval = 0;      // absolute hour (DA) or absolute slot (RT)
  MarketKind kind = MarketKind::DayAhead;
  int lead_time = 0;     // hours before delivery (DA), 0 for RT
  double cleared_price = 0.0;
  double total_quantity = 0.0;
  double inflexible = 0.0;
  std::vector<double> per_agent_q;  // by position in the bid list
  bool congested = false;
};

/// Aggregates, clears and allocates. At a demand jump the bids sitting on
/// the jump share the residual pro rata to their jump widths.
ClearedResult clear_bids(const std::vector<BidCurve>& bids, double inflexible,
                         const SupplyCurve& supply, int interval, MarketKind kind,
                         int lead_time = 0);

/// Day-ahead prices seen so far: the latest cleared price for every hour and
/// an exponential average of finalised prices by hour of day.
class PriceHistory {
 public:
  explicit PriceHistory(double daily_decay = 0.5) : decay_(daily_decay) {}

  void record_round(int hour, double price);
  /// Marks the hour's price as final (delivery) and folds it into the
  /// hour-of-day average.
  void finalize(int hour, double price);

  std::optional<double> latest(int hour) const;
  std::optional<double> hour_of_day_average(int hour_of_day) const;

 private:
  double decay_;
  std::map<int, double> latest_;
  std::optional<double> ema_[24];
};

/// Forecast for hours [start, start + horizon): the latest cleared price when
/// the hour has been cleared before, otherwise the hour-of-day average,
/// otherwise supply evaluated at the forecast inflexible load.
/// `inflexible_forecast` is indexed by horizon position.
PriceForecast forecast_prices(const PriceHistory& history,
                              const std::vector<double>& inflexible_forecast,
                              const SupplyModel& supply, int start, int horizon);

/// Cleared prices for each target hour in order of decreasing lead time.
class PriceEvolution {
 public:
  explicit PriceEvolution(int horizon = 48) : horizon_(horizon) {}
  void record(int target_hour, double price);
  const std::vector<double>& sequence(int target_hour) const;
  const std::map<int, std::vector<double>>& all() const { return seqs_; }

 private:
  int horizon_;
  std::map<int, std::vector<double>> seqs_;
};

/// True iff the last k prices span less than epsilon. Sequences shorter than
/// k are not converged.
bool check_convergence(const std::vector<double>& sequence, double epsilon, int k);

}  // namespace tev
