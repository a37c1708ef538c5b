#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "tev/errors.hpp"
#include "tev/ev_model.hpp"

using namespace tev;

TEST_CASE("catalog row with a percent share parses into a spec") {
  std::istringstream in(
      "model,sale_pct,range_miles,charger_kw,miles_per_kwh\n"
      "Tesla Model 3, 44.11%, 220, 11.5, 3.84\n");
  const auto cat = load_ev_catalog(in, ChargeMode::V1G);
  REQUIRE(cat.size() == 1);
  CHECK(cat[0].model_name == "Tesla Model 3");
  CHECK(cat[0].range_miles == doctest::Approx(220.0));
  CHECK(cat[0].charge_kw == doctest::Approx(11.5));
  CHECK(cat[0].miles_per_kwh == doctest::Approx(3.84));
  CHECK(cat[0].sale_weight == doctest::Approx(0.4411));
  CHECK(cat[0].discharge_kw == 0.0);
  CHECK(cat[0].eta_in == doctest::Approx(0.9));
}

TEST_CASE("V2G catalogs default the discharge rating to the charger rating") {
  std::istringstream in(
      "model,sale_pct,range_miles,charger_kw,miles_per_kwh\n"
      "Nissan Leaf,10%,150,6.6,4.0\n");
  CHECK(load_ev_catalog(in, ChargeMode::V2G)[0].discharge_kw == doctest::Approx(6.6));
}

TEST_CASE("empty catalog is rejected") {
  std::istringstream empty("");
  CHECK_THROWS_WITH_AS(load_ev_catalog(empty, ChargeMode::V1G), "empty catalog", ParseError);
  std::istringstream header_only("model,sale_pct,range_miles,charger_kw,miles_per_kwh\n");
  CHECK_THROWS_AS(load_ev_catalog(header_only, ChargeMode::V1G), ParseError);
}

TEST_CASE("malformed mileage names the offending cell") {
  std::istringstream in(
      "model,sale_pct,range_miles,charger_kw,miles_per_kwh\n"
      "Good,1%,100,7,4\n"
      "Bad,1%,100,7,abc\n");
  try {
    load_ev_catalog(in, ChargeMode::V1G);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == "miles_per_kwh");
  }
}

TEST_CASE("builtin catalog has fifteen valid models") {
  const auto cat = builtin_ev_catalog(ChargeMode::V1G);
  CHECK(cat.size() == 15);
  for (const auto& s : cat) CHECK_NOTHROW(s.validate());
}

TEST_CASE("pairing screen") {
  SUBCASE("short-range model cannot take a trip longer than its range") {
    EvSpec smart;
    smart.model_name = "Smart ED";
    smart.range_miles = 58;
    smart.charge_kw = 3.3;
    smart.miles_per_kwh = 3.22;
    CHECK_FALSE(pairing_feasible(smart, {18, 8, 70.0}));
  }
  SUBCASE("long plug window accepts a commuter") {
    // 12 h * 11.5 kW = 138 kWh exceeds the 57.3 kWh battery.
    CHECK(pairing_feasible(fixtures::model3(0.9), {20, 8, 30.0}));
  }
  SUBCASE("plug window too short to refill") {
    CHECK_FALSE(pairing_feasible(fixtures::model3(0.9), {18, 21, 30.0}));
  }
}

TEST_CASE("horizon sets") {
  SUBCASE("overnight parking wraps midnight") {
    const auto h = horizon_sets({18, 8, 20.0}, 0, 24);
    for (int t = 0; t < 24; ++t) CHECK(h.transactive[t] == (t >= 18 || t < 8));
    CHECK(h.kinds[18] == HourKind::Arrival);
    CHECK(h.kinds[8] == HourKind::Departure);
    CHECK(h.kinds[12] == HourKind::Away);
    CHECK(h.kinds[2] == HourKind::Parked);
  }
  SUBCASE("day parking") {
    const auto h = horizon_sets({9, 17, 20.0}, 0, 24);
    for (int t = 0; t < 24; ++t) CHECK(h.transactive[t] == (t >= 9 && t < 17));
  }
  SUBCASE("two days list both arrivals and departures") {
    const auto h = horizon_sets({18, 8, 20.0}, 0, 48);
    CHECK(h.arrival_hours == std::vector<int>{18, 42});
    CHECK(h.departure_hours == std::vector<int>{8, 32});
  }
  SUBCASE("offset start keeps relative indices") {
    const auto h = horizon_sets({18, 8, 20.0}, 10, 24);
    CHECK(h.arrival_hours == std::vector<int>{8});
    CHECK(h.departure_hours == std::vector<int>{22});
  }
}

TEST_CASE("metered energy applies the efficiencies") {
  EvSpec s = fixtures::model3(0.9, 11.5);
  CHECK(metered_energy(9.0, 0.0, s).in_billed == doctest::Approx(10.0));
  CHECK(metered_energy(0.0, 10.0, s).out_billed == doctest::Approx(9.0));
  const auto z = metered_energy(0.0, 0.0, s);
  CHECK(z.in_billed == 0.0);
  CHECK(z.out_billed == 0.0);
}

TEST_CASE("step_soc") {
  const EvSpec s = fixtures::model3(0.9);
  EvState st = EvState::full(s);
  st.soc = 40.0;
  SUBCASE("driving hour drains half the daily trip") {
    CHECK(step_soc(st, 0, 0, HourKind::Departure, 38.4, s).soc == doctest::Approx(35.0));
  }
  SUBCASE("parked hour adds the battery-side energy") {
    CHECK(step_soc(st, 11.5, 0, HourKind::Parked, 38.4, s).soc == doctest::Approx(51.5));
  }
  SUBCASE("overcharge is a physics violation") {
    st.soc = st.c_max - 1.0;
    CHECK_THROWS_AS(step_soc(st, 5.0, 0, HourKind::Parked, 38.4, s), PhysicsViolation);
  }
  SUBCASE("exchange while away is a physics violation") {
    CHECK_THROWS_AS(step_soc(st, 1.0, 0, HourKind::Away, 38.4, s), PhysicsViolation);
  }
  SUBCASE("away hour is unchanged") {
    CHECK(step_soc(st, 0, 0, HourKind::Away, 38.4, s).soc == doctest::Approx(40.0));
  }
}

TEST_CASE("energy bookkeeping closes over whole days") {
  // Random feasible exchanges on a V2G car, three days from the start hour 0.
  const EvSpec s = fixtures::model3(0.9, 5.0);
  const DrivingSchedule sch{18, 8, 40.0};
  const auto sets = horizon_sets(sch, 0, 72);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EvState st = EvState::full(s);
  const double start = st.soc;
  double net = 0.0;
  for (int t = 0; t < 72; ++t) {
    double ein = 0, eout = 0;
    const auto k = sets.kinds[t];
    if (sets.transactive[t]) {
      const double drained = st.soc - (k == HourKind::Arrival ? half_trip_kwh(sch, s) : 0.0);
      ein = std::min(s.charge_kw, st.c_max - drained) * u(rng);
      eout = std::min(s.discharge_kw, drained - st.c_min) * u(rng) * 0.5;
    }
    st = step_soc(st, ein, eout, k, sch.daily_miles, s);
    CHECK(st.soc >= st.c_min - 1e-9);
    CHECK(st.soc <= st.c_max + 1e-9);
    net += ein - eout;
  }
  CHECK(st.soc - start == doctest::Approx(net - 3 * sch.daily_miles / s.miles_per_kwh));
}

TEST_CASE("fleet synthesis") {
  const auto cat = builtin_ev_catalog(ChargeMode::V1G);
  const auto pool = synthesize_schedules(500, 4);

  SUBCASE("deterministic for a fixed seed") {
    const auto a = synthesize_fleet(cat, pool, 50, 9, SliderDistribution::uniform(0, 1));
    const auto b = synthesize_fleet(cat, pool, 50, 9, SliderDistribution::uniform(0, 1));
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].spec.model_name == b[i].spec.model_name);
      CHECK(a[i].schedule.daily_miles == b[i].schedule.daily_miles);
      CHECK(a[i].slider == b[i].slider);
    }
  }

  SUBCASE("every pairing passes the screen and sliders stay in range") {
    const auto f = synthesize_fleet(cat, pool, 300, 2, SliderDistribution::uniform(0.2, 0.6));
    for (const auto& a : f) {
      CHECK(pairing_feasible(a.spec, a.schedule));
      CHECK(a.schedule.daily_miles < a.spec.range_miles);
      CHECK(a.schedule.plugged_hours() * a.spec.charge_kw > a.spec.capacity_kwh());
      CHECK(a.slider >= 0.2);
      CHECK(a.slider <= 0.6);
    }
  }

  SUBCASE("model mix follows normalised sale weights") {
    const int n = 10000;
    const auto f = synthesize_fleet(cat, pool, n, 3, SliderDistribution::fixed(0.5));
    std::map<std::string, int> counts;
    for (const auto& a : f) ++counts[a.spec.model_name];
    double total_w = 0;
    for (const auto& s : cat) total_w += s.sale_weight;
    double chi2 = 0;
    for (const auto& s : cat) {
      const double expected = n * s.sale_weight / total_w;
      const double d = counts[s.model_name] - expected;
      chi2 += d * d / expected;
    }
    // 14 degrees of freedom, 0.1% upper tail.
    CHECK(chi2 < 36.12);
  }

  SUBCASE("infeasible catalog reports the model") {
    EvSpec tiny;
    tiny.model_name = "Tiny";
    // 50 kWh behind a 10 W charger: no plug window can refill it.
    tiny.range_miles = 50;
    tiny.miles_per_kwh = 1;
    tiny.charge_kw = 0.01;
    tiny.sale_weight = 1;
    try {
      synthesize_fleet({tiny}, pool, 1, 1, SliderDistribution::fixed(0.5));
      FAIL("expected a fleet error");
    } catch (const FleetError& e) {
      CHECK(e.model() == "Tiny");
    }
  }
}
