#include "tev/control.hpp"

#include <algorithm>
#include <cmath>

namespace tev {

namespace {
constexpr double kSlotFraction = 1.0 / kRtSlotsPerHour;
constexpr double kDeviationTol = 1e-9;
}  // namespace

ControlAction apply_control(EvState& state, double committed, HourKind kind, double daily_miles,
                            const EvSpec& spec) {
  ControlAction act;
  act.committed_kwh = committed;
  const bool plugged = kind == HourKind::Arrival || kind == HourKind::Parked;
  const bool drives = kind == HourKind::Arrival || kind == HourKind::Departure;
  const double drain = drives ? half_trip_kwh({0, 0, daily_miles}, spec) * kSlotFraction : 0.0;
  const double base = state.soc - drain;

  double e_in = 0.0, e_out = 0.0;
  if (plugged) {
    if (committed > 0) {
      e_in = std::min({committed * spec.eta_in, spec.charge_kw * kSlotFraction,
                       std::max(0.0, state.c_max - base)});
    } else if (committed < 0) {
      e_out = std::min({-committed / spec.eta_out, spec.discharge_kw * kSlotFraction,
                        std::max(0.0, base - state.c_min)});
    }
    act.delivered_kwh = metered_energy(e_in, e_out, spec).net();
  }
  act.deviation = std::fabs(act.delivered_kwh - committed) > kDeviationTol;
  if (!act.deviation) act.delivered_kwh = committed;
  act.setpoint_kw = (e_in - e_out) / kSlotFraction;

  const double next = base + e_in - e_out;
  if (next < state.c_min - 1e-9) {
    // Only the driving drain can get here; keep the physical value and flag it.
    act.floor_breach = true;
    state.soc = next;
    state.hour_energy_in = e_in;
    state.hour_energy_out = e_out;
  } else {
    state = step_soc(state, e_in, e_out, kind, daily_miles, spec, kSlotFraction);
  }
  act.resulting_soc = state.soc;
  return act;
}

ControlAction apply_control(EvState& state, const BidCurve& slot_bid, double cleared_price,
                            HourKind kind, double daily_miles, const EvSpec& spec) {
  return apply_control(state, quantity_at_price(slot_bid, cleared_price), kind, daily_miles, spec);
}

}  // namespace tev
