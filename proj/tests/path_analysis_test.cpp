#include <doctest.h>

#include <random>

#include "cute/path_analysis.hpp"
#include "oracles.hpp"

using namespace cute;
using doctest::Approx;

TEST_SUITE("path_analysis") {

TEST_CASE("model validation") {
  CHECK_THROWS_AS(ClosedNetworkModel({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ClosedNetworkModel({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ClosedNetworkModel({1.0, -2.0}), std::invalid_argument);
  const ClosedNetworkModel m({1.0, 3.0, 2.0});
  CHECK(m.queue_count() == 3);
  CHECK(m.total_service() == 6.0);
  CHECK(m.bottleneck_service() == 3.0);
}

TEST_CASE("mva_closed examples") {
  const auto four = ClosedNetworkModel::identical(4);
  const auto r = mva_closed(four, 3);
  CHECK(r.throughput == Approx(0.5).epsilon(1e-12));
  CHECK(r.response == Approx(6.0).epsilon(1e-12));

  const auto two = mva_closed(ClosedNetworkModel({1.0, 1.0}), 1);
  CHECK(two.throughput == Approx(0.5));
  CHECK(two.response == Approx(2.0));

  const ClosedNetworkModel het({0.5, 2.5, 1.25, 3.0});
  CHECK(mva_closed(het, 1).response == Approx(het.total_service()));

  CHECK_THROWS_AS(mva_closed(four, 0), std::invalid_argument);
}

TEST_CASE("power") {
  CHECK(power(0.5, 6.0) == Approx(1.0 / 12.0));
  CHECK(power(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(power(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(power(1.0, -1.0), std::invalid_argument);

  const auto curve = power_curve(ClosedNetworkModel::identical(6), 20);
  REQUIRE(curve.size() == 20);
  for (const auto &p : curve) {
    const double c = p.customers;
    CHECK(p.power == Approx(c / ((5 + c) * (5 + c))).epsilon(1e-12));
    CHECK(p.power == p.throughput / p.response);
  }
}

TEST_CASE("optimal_population") {
  CHECK(optimal_population(ClosedNetworkModel::identical(4), 20) == 3);
  CHECK(optimal_population(ClosedNetworkModel::identical(11), 40) == 10);
  CHECK(optimal_population(ClosedNetworkModel::identical(11), 4) == 4);

  const ClosedNetworkModel het({1.0, 2.0, 1.0});
  const auto best = optimal_population(het, 20);
  CHECK(best == oracle::best_population({1.0, 2.0, 1.0}, 20));
  CHECK(best <= 2);
  CHECK_THROWS(optimal_population(het, 0));
}

TEST_CASE("queue_count") {
  CHECK(queue_count({4, Duplex::Full, true, true}) == 13);
  CHECK(queue_count({4, Duplex::Half, true, true}) == 9);
  CHECK(queue_count({4, Duplex::Full, false, true}) == 9);
  CHECK(queue_count({4, Duplex::Full, true, false}) == 9);
  CHECK(queue_count({4, Duplex::Half, true, false}) == 9);
  CHECK(queue_count({4, Duplex::Half, false, false}) == 5);
  CHECK(queue_count({4, Duplex::Full, false, false}) == 5);
  CHECK_THROWS(queue_count({0, Duplex::Full, true, true}));
  for (std::uint32_t h = 1; h <= 64; ++h) {
    CHECK(queue_count({h, Duplex::Full, true, true}) -
              queue_count({h, Duplex::Half, true, true}) ==
          h);
    for (auto d : {Duplex::Full, Duplex::Half})
      for (bool cpu : {false, true})
        for (bool acks : {false, true})
          CHECK(queue_count({h, d, cpu, acks}) >= h);
  }
}

TEST_CASE("pipe sizes") {
  CHECK(terrestrial_pipe_size(4) == 12);
  CHECK(terrestrial_pipe_size(1) == 3);
  CHECK_THROWS_AS(terrestrial_pipe_size(0), std::invalid_argument);

  CHECK(satellite_pipe_size(0.600, 0.050) == 12);
  CHECK(satellite_pipe_size(0.7, 0.7) == 1);
  CHECK(satellite_pipe_size(0.100, 0.040) == 3);
  CHECK(satellite_pipe_size(0.099, 0.040) == 2);
  CHECK_THROWS_AS(satellite_pipe_size(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(satellite_pipe_size(1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(satellite_pipe_size(1.0, 2.0), std::invalid_argument);

  for (std::uint32_t h = 1; h <= 8; ++h)
    CHECK(optimal_population(ClosedNetworkModel::identical(3 * h + 1),
                             12 * h) == terrestrial_pipe_size(h));
}

TEST_CASE("property: MVA matches the identical-server closed form") {
  for (std::uint32_t n = 1; n <= 30; ++n) {
    const auto model = ClosedNetworkModel::identical(n + 1);
    const auto curve = power_curve(model, 4 * n);
    for (std::uint32_t c = 1; c <= 4 * n; ++c) {
      const auto expect = oracle::identical_closed_form(n, c);
      REQUIRE(curve[c - 1].throughput ==
              Approx(expect.throughput).epsilon(1e-12));
      REQUIRE(curve[c - 1].response == Approx(expect.response).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: MVA matches the convolution algorithm") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> s(0.1, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> times(2 + rng() % 9);
    for (auto &t : times)
      t = s(rng);
    const ClosedNetworkModel model(times);
    const auto c_max = static_cast<std::uint32_t>(1 + rng() % 40);
    const auto curve = power_curve(model, c_max);
    for (std::uint32_t c = 1; c <= c_max; ++c) {
      const auto expect = oracle::buzen(times, c);
      REQUIRE(curve[c - 1].throughput ==
              Approx(expect.throughput).epsilon(1e-10));
      REQUIRE(curve[c - 1].response == Approx(expect.response).epsilon(1e-10));
      const auto direct = mva_closed(model, c);
      REQUIRE(direct.throughput == curve[c - 1].throughput);
    }
    REQUIRE(optimal_population(model, c_max) ==
            oracle::best_population(times, c_max));
  }
}

TEST_CASE("property: monotone throughput and response, bottleneck bound") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(0.2, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> times(2 + rng() % 7);
    for (auto &t : times)
      t = s(rng);
    const ClosedNetworkModel model(times);
    const auto curve = power_curve(model, 60);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      REQUIRE(curve[i].throughput * model.bottleneck_service() <= 1.0 + 1e-12);
      REQUIRE(curve[i].response >= model.total_service() * (1 - 1e-12));
      if (i > 0) {
        REQUIRE(curve[i].response > curve[i - 1].response);
        // Once X sits on the bottleneck bound the increments vanish below
        // double precision.
        const bool saturated = curve[i - 1].throughput *
                                   model.bottleneck_service() >
                               1.0 - 1e-12;
        if (saturated)
          REQUIRE(curve[i].throughput >=
                  curve[i - 1].throughput * (1 - 1e-14));
        else
          REQUIRE(curve[i].throughput > curve[i - 1].throughput);
      }
    }
  }
}

TEST_CASE("property: power is unimodal with its peak at N") {
  for (std::uint32_t n = 1; n <= 50; ++n) {
    const auto curve =
        power_curve(ClosedNetworkModel::identical(n + 1), 3 * n);
    for (std::uint32_t c = 1; c < 3 * n; ++c) {
      if (c < n)
        REQUIRE(curve[c].power > curve[c - 1].power);
      else
        REQUIRE(curve[c].power < curve[c - 1].power);
    }
  }
}

}
