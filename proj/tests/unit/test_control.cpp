#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "tev/control.hpp"

using namespace tev;

TEST_CASE("price inside the deadband delivers the anchored quantity") {
  const EvSpec s = fixtures::model3(0.9);
  const auto hour = four_point_bid(6.0, 0.06, -0.01, 0.002, s, 0.5);
  const auto slot = rt_bid(6.0, 6.0, 4, hour);
  EvState st = EvState::full(s);
  st.soc = 30.0;
  const auto act = apply_control(st, slot, 0.0605, HourKind::Parked, 30.0, s);
  CHECK(act.committed_kwh == doctest::Approx(0.5));
  CHECK(act.delivered_kwh == doctest::Approx(0.5));
  CHECK_FALSE(act.deviation);
  CHECK(st.soc == doctest::Approx(30.0 + 0.5 * 0.9));
  CHECK(act.setpoint_kw == doctest::Approx(0.5 * 0.9 * kRtSlotsPerHour));
}

TEST_CASE("full battery clips a charge commitment to zero") {
  const EvSpec s = fixtures::model3(0.9);
  EvState st = EvState::full(s);
  const auto act = apply_control(st, 0.4, HourKind::Parked, 30.0, s);
  CHECK(act.delivered_kwh == 0.0);
  CHECK(act.setpoint_kw == 0.0);
  CHECK(act.deviation);
  CHECK(act.deviation_kwh() == doctest::Approx(0.4));
  CHECK(st.soc == doctest::Approx(st.c_max));
}

TEST_CASE("empty battery clips an export commitment to zero") {
  const EvSpec s = fixtures::model3(0.9, 11.5);
  EvState st = EvState::full(s);
  st.soc = st.c_min;
  const auto act = apply_control(st, -2.0 / kRtSlotsPerHour, HourKind::Parked, 30.0, s);
  CHECK(act.delivered_kwh == 0.0);
  CHECK(act.deviation);
  CHECK(st.soc == doctest::Approx(st.c_min));
}

TEST_CASE("commitments beyond the charger rating are clipped") {
  const EvSpec s = fixtures::model3(1.0);
  EvState st = EvState::full(s);
  st.soc = 20.0;
  const auto act = apply_control(st, 2.0, HourKind::Parked, 30.0, s);
  CHECK(act.delivered_kwh == doctest::Approx(11.5 / kRtSlotsPerHour));
  CHECK(act.deviation);
}

TEST_CASE("an unplugged vehicle delivers nothing") {
  const EvSpec s = fixtures::model3(0.9);
  EvState st = EvState::full(s);
  st.soc = 40.0;
  SUBCASE("zero commitment is not a deviation") {
    const auto act = apply_control(st, 0.0, HourKind::Away, 30.0, s);
    CHECK_FALSE(act.deviation);
    CHECK(st.soc == 40.0);
  }
  SUBCASE("nonzero commitment is logged") {
    const auto act = apply_control(st, 0.3, HourKind::Away, 30.0, s);
    CHECK(act.deviation);
    CHECK(act.delivered_kwh == 0.0);
  }
  SUBCASE("departure slots book a twelfth of the half trip") {
    apply_control(st, 0.0, HourKind::Departure, 38.4, s);
    CHECK(st.soc == doctest::Approx(40.0 - 5.0 / kRtSlotsPerHour));
  }
}

TEST_CASE("delivery matches commitment whenever no bound binds") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const EvSpec s = fixtures::model3(0.9, 7.0);
  EvState st = EvState::full(s);
  for (int i = 0; i < 2000; ++i) {
    st.soc = st.c_max * (0.5 + 0.4 * u(rng));
    const double commit = 0.4 * u(rng);
    const auto act = apply_control(st, commit, HourKind::Parked, 30.0, s);
    CHECK_FALSE(act.deviation);
    CHECK(act.delivered_kwh == doctest::Approx(commit).epsilon(1e-12));
    CHECK(st.soc >= st.c_min);
    CHECK(st.soc <= st.c_max);
  }
}
