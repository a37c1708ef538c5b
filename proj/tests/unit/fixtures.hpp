#pragma once

#include "tev/ev_model.hpp"

namespace fixtures {

/// 220 mi / 3.84 mi/kWh, 11.5 kW charger; lossless unless overridden.
inline tev::EvSpec model3(double eta = 1.0, double discharge_kw = 0.0) {
  tev::EvSpec s;
  s.model_name = "Tesla Model 3";
  s.range_miles = 220.0;
  s.miles_per_kwh = 3.84;
  s.charge_kw = 11.5;
  s.discharge_kw = discharge_kw;
  s.eta_in = eta;
  s.eta_out = eta;
  s.sale_weight = 0.4411;
  return s;
}

inline tev::AgentConfig agent(const tev::EvSpec& spec, int t_in, int t_out, double miles,
                              double slider) {
  tev::AgentConfig a;
  a.spec = spec;
  a.schedule = {t_in, t_out, miles};
  a.slider = slider;
  return a;
}

}  // namespace fixtures
