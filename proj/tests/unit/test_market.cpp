#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "tev/errors.hpp"
#include "tev/market.hpp"

using namespace tev;

namespace {

SupplyCurve supply(double a = 0.03, double b = 1e-4, double q_max = 1e9, double s = 0.05) {
  return {a, b, q_max, s};
}

// Small "desk" bids: two flexible agents with different plans and slopes.
std::vector<BidCurve> desk_bids() {
  const EvSpec s = fixtures::model3(0.9, 6.0);
  return {four_point_bid(5.0, 0.06, -0.004, 0.002, s, 0.7),
          four_point_bid(2.0, 0.065, -0.009, 0.002, s, 0.3)};
}

// Crossing of demand with supply found by stepping the price upward until
// supply meets or exceeds demand.
double sweep_price(const std::vector<BidCurve>& bids, double inflexible, const SupplyCurve& sc,
                   double step = 1e-5) {
  for (double p = 0.0; p < 2.0; p += step) {
    double q = inflexible;
    for (const auto& b : bids) q += quantity_at_price(b, p);
    if ((p - sc.base_price) / sc.slope >= q) return p;
  }
  return NAN;
}

}  // namespace

TEST_CASE("aggregation") {
  SUBCASE("no agents is a vertical line at the inflexible load") {
    const auto d = aggregate_demand({}, 300.0);
    for (double p : {0.0, 0.05, 1.0}) CHECK(d.quantity_at(p) == 300.0);
  }
  SUBCASE("one agent shifts by the inflexible load") {
    const auto bids = desk_bids();
    const auto d = aggregate_demand({bids[0]}, 120.0);
    for (double p = 0.0; p < 0.2; p += 0.0013)
      CHECK(d.quantity_at(p) == doctest::Approx(120.0 + quantity_at_price(bids[0], p)));
  }
  SUBCASE("two identical agents double every quantity") {
    const auto b = desk_bids()[0];
    const auto one = aggregate_demand({b}, 0.0);
    const auto two = aggregate_demand({b, b}, 0.0);
    for (double p = 0.0; p < 0.2; p += 0.0011) {
      CHECK(two.quantity_at(p) == doctest::Approx(2 * one.quantity_at(p)));
      CHECK(two.range_at(p).at_lower == doctest::Approx(2 * one.range_at(p).at_lower));
    }
  }
}

TEST_CASE("clearing examples") {
  SUBCASE("vertical demand on affine supply") {
    const auto cp = clear(aggregate_demand({}, 300.0), supply());
    CHECK(cp.price == doctest::Approx(0.06));
    CHECK(cp.quantity == doctest::Approx(300.0));
    CHECK_FALSE(cp.congested);
  }
  SUBCASE("demand priced entirely below supply clears at its saturated minimum") {
    const auto b = four_point_bid(4.0, 0.01, -0.0005, 0.001, fixtures::model3(1.0), 1.0);
    const auto r = clear_bids({b}, 0.0, supply(), 0, MarketKind::DayAhead);
    CHECK(r.per_agent_q[0] == doctest::Approx(0.0));
    CHECK(r.cleared_price == doctest::Approx(0.03));
  }
  SUBCASE("flat supply clears at its base price") {
    const auto bids = desk_bids();
    const auto r = clear_bids(bids, 200.0, supply(0.06, 0.0), 0, MarketKind::DayAhead);
    CHECK(r.cleared_price == 0.06);
    CHECK(r.per_agent_q[0] == doctest::Approx(quantity_at_price(bids[0], 0.06)));
  }
  SUBCASE("net export below the price floor is a market error") {
    const auto v = inflexible_bid(-1000.0, 0.05, fixtures::model3());
    CHECK_THROWS_AS(clear(aggregate_demand({v}, 0.0), supply()), MarketError);
  }
}

TEST_CASE("desk instance agrees with a brute-force price sweep") {
  const auto bids = desk_bids();
  for (double inflex : {0.0, 150.0, 280.0, 300.0, 330.0, 400.0}) {
    CAPTURE(inflex);
    const auto sc = supply();
    const auto r = clear_bids(bids, inflex, sc, 0, MarketKind::DayAhead);
    CHECK(std::fabs(r.cleared_price - sweep_price(bids, inflex, sc)) <= 1e-4);
  }
}

TEST_CASE("random instances: conservation, consistency, oracle agreement") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<BidCurve> bids;
    const int n = 1 + static_cast<int>(u(rng) * 6);
    for (int i = 0; i < n; ++i) {
      const EvSpec s = fixtures::model3(0.9, u(rng) < 0.5 ? 0.0 : 5.0);
      const double q_min = -s.discharge_kw * s.eta_out, q_max = s.charge_kw / s.eta_in;
      const double omega = u(rng) < 0.2 ? 0.0 : u(rng);
      const double slope = omega > 0 ? -(0.01 + 0.05 * u(rng)) / (q_max - q_min) / omega : 0.0;
      bids.push_back(four_point_bid(q_min + u(rng) * (q_max - q_min), 0.04 + 0.05 * u(rng), slope,
                                    0.003 * u(rng), s, omega));
    }
    const double inflex = 200 + 200 * u(rng);
    const auto sc = supply(0.03, 1e-4);
    const auto r = clear_bids(bids, inflex, sc, rep, MarketKind::DayAhead);
    CAPTURE(rep);
    double total = inflex;
    for (double q : r.per_agent_q) total += q;
    CHECK(r.total_quantity == doctest::Approx(total).epsilon(1e-12));
    CHECK(r.total_quantity == doctest::Approx((r.cleared_price - sc.base_price) / sc.slope).epsilon(1e-9));
    CHECK(std::fabs(r.cleared_price - sweep_price(bids, inflex, sc)) <= 1e-4);
    for (std::size_t i = 0; i < bids.size(); ++i) {
      const auto range = quantity_range_at_price(bids[i], r.cleared_price);
      CHECK(r.per_agent_q[i] >= range.at_higher - 1e-9);
      CHECK(r.per_agent_q[i] <= range.at_lower + 1e-9);
    }

    // Comparative statics.
    const auto more_load = clear_bids(bids, inflex + 25.0, sc, rep, MarketKind::DayAhead);
    CHECK(more_load.cleared_price >= r.cleared_price - 1e-12);
    auto more_bids = bids;
    more_bids.push_back(four_point_bid(3.0, 0.07, -0.002, 0.001, fixtures::model3(0.9), 0.5));
    const auto more_agents = clear_bids(more_bids, inflex, sc, rep, MarketKind::DayAhead);
    CHECK(more_agents.cleared_price >= r.cleared_price - 1e-12);
  }
}

TEST_CASE("bids sharing a demand jump split the residual pro rata") {
  const EvSpec s = fixtures::model3(1.0);
  const auto b = four_point_bid(5.0, 0.06, -0.01, 0.005, s, 0.5);  // flat tail at 0.055
  // Supply meets demand inside the jump at 0.055, where supply takes 250 kWh.
  const auto r = clear_bids({b, b}, 237.0, supply(), 0, MarketKind::DayAhead);
  CHECK(r.cleared_price == doctest::Approx(0.055));
  CHECK(r.per_agent_q[0] == doctest::Approx(6.5));
  CHECK(r.per_agent_q[1] == doctest::Approx(6.5));
  CHECK(r.total_quantity == doctest::Approx(250.0));
}

TEST_CASE("congestion flag and surcharge") {
  const auto bids = desk_bids();
  const auto free = clear_bids(bids, 300.0, supply(), 0, MarketKind::DayAhead);
  SUBCASE("limit above the intersection leaves the price alone") {
    const auto r = clear_bids(bids, 300.0, supply(0.03, 1e-4, free.total_quantity + 1.0), 0,
                              MarketKind::DayAhead);
    CHECK_FALSE(r.congested);
    CHECK(r.cleared_price == doctest::Approx(free.cleared_price));
  }
  SUBCASE("limit below the intersection adds the surcharge once") {
    const auto r = clear_bids(bids, 300.0, supply(0.03, 1e-4, free.total_quantity - 1.0, 0.05), 0,
                              MarketKind::DayAhead);
    CHECK(r.congested);
    CHECK(r.cleared_price == doctest::Approx(free.cleared_price + 0.05));
    CHECK(r.total_quantity <= free.total_quantity);
  }
}

TEST_CASE("supply model") {
  SupplyModel m;
  m.hourly = supply(0.03, 1e-4);
  m.evening_bump = 0.5;
  CHECK(m.for_hour(19).base_price == doctest::Approx(0.045));
  CHECK(m.for_hour(19 + 24).base_price == doctest::Approx(0.045));
  CHECK(m.for_hour(7).base_price < m.for_hour(17).base_price);
  CHECK(m.for_hour(5).base_price == doctest::Approx(0.03).epsilon(1e-3));
  const auto rt = m.for_rt_slot(19);
  CHECK(rt.slope == doctest::Approx(1e-4 * kRtSlotsPerHour));
  CHECK(rt.feeder_limit == doctest::Approx(1e9 / kRtSlotsPerHour));
  m.hourly.slope = -1;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("forecasts") {
  SupplyModel m;
  m.hourly = supply(0.03, 1e-4);
  m.evening_bump = 0.0;
  const std::vector<double> inflex(24, 300.0);

  SUBCASE("no history bootstraps from supply") {
    PriceHistory h;
    const auto f = forecast_prices(h, inflex, m, 0, 24);
    for (double p : f.prices) CHECK(p == doctest::Approx(0.06));
  }
  SUBCASE("constant history is a fixed point") {
    PriceHistory h;
    for (int d = 0; d < 4; ++d) h.finalize(18 + 24 * d, 0.05);
    const auto f = forecast_prices(h, inflex, m, 24 * 4, 24);
    CHECK(f.prices[18] == doctest::Approx(0.05));
  }
  SUBCASE("alternating history lands between its values") {
    PriceHistory h;
    h.finalize(18, 0.04);
    h.finalize(42, 0.06);
    const double p = *h.hour_of_day_average(18);
    CHECK(p > 0.04);
    CHECK(p < 0.06);
  }
  SUBCASE("the latest cleared round wins over the average") {
    PriceHistory h;
    h.finalize(18, 0.05);
    h.record_round(42, 0.08);
    const auto f = forecast_prices(h, inflex, m, 24, 24);
    CHECK(f.prices[18] == doctest::Approx(0.08));
  }
}

TEST_CASE("price evolution keeps the newest rounds") {
  PriceEvolution ev(3);
  for (int i = 0; i < 5; ++i) ev.record(10, 0.05 + 0.001 * i);
  const auto& seq = ev.sequence(10);
  REQUIRE(seq.size() == 3);
  CHECK(seq.back() == doctest::Approx(0.054));
}

TEST_CASE("convergence check") {
  CHECK(check_convergence(std::vector<double>(8, 0.05), 0.001, 6));
  std::vector<double> alt;
  for (int i = 0; i < 8; ++i) alt.push_back(0.05 + (i % 2 ? 0.002 : -0.002));
  CHECK_FALSE(check_convergence(alt, 0.001, 6));
  CHECK_FALSE(check_convergence({0.05, 0.05}, 0.001, 6));
  std::vector<double> settling{0.09, 0.07, 0.06, 0.0501, 0.0502, 0.0500, 0.0503, 0.0501, 0.0502};
  CHECK(check_convergence(settling, 0.001, 6));
  CHECK_THROWS_AS(check_convergence(settling, 0.001, 1), std::invalid_argument);
}
