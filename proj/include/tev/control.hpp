#pragma once

#include "tev/bidding.hpp"
#include "tev/ev_model.hpp"

namespace tev {

struct ControlAction {
  int agent_id = 0;
  int hour = 0;
  int slot = 0;
  double committed_kwh = 0.0;  // metered, per slot
  double delivered_kwh = 0.0;  // metered, per slot
  double setpoint_kw = 0.0;    // battery side, positive = charging
  double resulting_soc = 0.0;
  bool deviation = false;      // delivered differs from committed
  bool floor_breach = false;   // driving drain took the SOC below its floor

  double deviation_kwh() const { return committed_kwh - delivered_kwh; }
};

/// Delivers a metered per-slot commitment. The commitment is converted to
/// battery-side energy and clipped only where an SOC bound or the charger
/// rating would be broken; any shortfall is flagged as a deviation. An
/// unplugged vehicle delivers nothing.
ControlAction apply_control(EvState& state, double committed_slot_kwh, HourKind kind,
                            double daily_miles, const EvSpec& spec);

/// Reads the commitment off the slot bid at the cleared price, then delivers it.
ControlAction apply_control(EvState& state, const BidCurve& slot_bid, double cleared_price,
                            HourKind kind, double daily_miles, const EvSpec& spec);

}  // namespace tev
