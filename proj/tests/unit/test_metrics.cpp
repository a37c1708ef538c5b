#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tev/metrics.hpp"

using namespace tev;

namespace {

// Average rank by counting, then Pearson on the ranks.
double rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("savings") {
  CHECK(savings(8.0, 10.0) == doctest::Approx(20.0));
  CHECK(savings(10.0, 10.0) == 0.0);
  CHECK(savings(3.0, 0.0) == 0.0);
  CHECK(savings(12.0, 10.0) == doctest::Approx(-20.0));
}

TEST_CASE("amenity") {
  const double c_max = 50.0, eps = kFullChargeFraction * c_max;
  const std::vector<double> base{50, 50, 40, 49.6, 30, 50};
  CHECK(*amenity(base, base, c_max, eps) == doctest::Approx(100.0));
  const std::vector<double> trans{50, 45, 40, 30, 30, 50};
  CHECK(*amenity(trans, base, c_max, eps) == doctest::Approx(50.0));
  const std::vector<double> never{10, 20, 30};
  CHECK_FALSE(amenity(never, never, c_max, eps).has_value());
}

TEST_CASE("spearman") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  const std::vector<double> x{0.1, 0.1, 0.3, 0.5, 0.5, 0.5, 0.9};
  const std::vector<double> y{2.0, 1.0, 1.0, 4.0, 3.0, 3.0, 8.0};
  CHECK(spearman(x, y) == doctest::Approx(rank_correlation(x, y)));

  std::mt19937 rng(1);
  std::uniform_int_distribution<int> d(0, 5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
      a.push_back(d(rng));
      b.push_back(d(rng) + 0.5 * a.back());
    }
    CHECK(spearman(a, b) == doctest::Approx(rank_correlation(a, b)));
  }
}

TEST_CASE("population variance") {
  CHECK(variance({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(4.0));
  CHECK(variance({3, 3, 3}) == 0.0);
}

TEST_CASE("base case charges flat out from arrival") {
  const EvSpec s = fixtures::model3(0.9);
  const AgentConfig a = fixtures::agent(s, 0, 6, 30.0, 0.5);
  const double half = half_trip_kwh(a.schedule, s);
  const std::vector<double> prices(8, 0.1);

  SUBCASE("a 20 kWh deficit takes two hours") {
    const auto b = base_case_sim(a, prices, 0, s.capacity_kwh() - 20.0 + half);
    CHECK(b.energy_in[0] == doctest::Approx(11.5));
    CHECK(b.energy_in[1] == doctest::Approx(8.5));
    CHECK(b.energy_in[2] == 0.0);
    CHECK(b.metered[0] == doctest::Approx(11.5 / 0.9));
    CHECK(b.bill == doctest::Approx(0.1 * 20.0 / 0.9));
    CHECK(b.soc[1] == doctest::Approx(s.capacity_kwh()));
  }
  SUBCASE("no deficit, no charging") {
    const auto b = base_case_sim(a, prices, 1, s.capacity_kwh());
    for (double e : b.energy_in) CHECK(e == 0.0);
    CHECK(b.bill == 0.0);
  }
}

TEST_CASE("identical runs give identical system numbers") {
  RunTrace t;
  t.substation_load = {100, 140, 120};
  t.ev_load = {10, 40, 20};
  t.rt_price = {0.05, 0.09, 0.07};
  t.converged_fraction = 1.0;
  const auto r = system_report(t, t);
  CHECK(r.peak_load_base == r.peak_load_transactive);
  CHECK(r.peak_load_base == 140);
  CHECK(r.peak_price_base == r.peak_price_transactive);
  CHECK(r.ev_variance_base == r.ev_variance_transactive);
}
