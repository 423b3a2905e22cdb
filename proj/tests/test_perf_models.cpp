#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dcnet/error.hpp"
#include "dcnet/perf_models.hpp"

using namespace dcnet;

namespace {

// Composite Simpson rule on the density, in log space to tame the tail.
double cdf_by_simpson(double x, double u, double s)
{
  const double lo = u - 12 * s, hi = std::log(x);
  if (hi <= lo) return 0.0;
  const int n = 20000;
  const double h = (hi - lo) / n;
  auto f = [&](double y) { // density of ln X at y
    const double z = (y - u) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2 * std::numbers::pi));
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4 : 2);
  return acc * h / 3;
}

double monte_carlo_max(std::size_t n, double u, double s, int trials, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> d(u, s);
  double total = 0;
  for (int t = 0; t < trials; ++t) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, d(rng));
    total += m;
  }
  return total / trials;
}

} // namespace

TEST_CASE("log-normal cdf")
{
  CHECK(lognormal_cdf(std::exp(0.97), 0.97, 0.06) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lognormal_cdf(1e300, 0.97, 0.06) == 1.0);
  CHECK(std::abs(lognormal_cdf(2.8, 0.97, 0.06) - cdf_by_simpson(2.8, 0.97, 0.06)) < 1e-9);
  for (double x : {0.5, 1.0, 2.0, 2.5, 2.64, 3.0, 4.0})
    CHECK(std::abs(lognormal_cdf(x, 0.97, 0.06) - cdf_by_simpson(x, 0.97, 0.06)) < 1e-9);
  CHECK_THROWS_AS(lognormal_cdf(0.0, 0.97, 0.06), Error);
  CHECK_THROWS_AS(lognormal_cdf(-1.0, 0.97, 0.06), Error);
}

TEST_CASE("log-normal pdf is the standard density")
{
  // Integrates to the cdf and peaks at the mode exp(u - s^2).
  const double u = 0.97, s = 0.06;
  const double mode = std::exp(u - s * s);
  CHECK(lognormal_pdf(mode, u, s) > lognormal_pdf(mode * 1.01, u, s));
  CHECK(lognormal_pdf(mode, u, s) > lognormal_pdf(mode * 0.99, u, s));
  const double h = 1e-5, x = 2.7;
  const double slope = (lognormal_cdf(x + h, u, s) - lognormal_cdf(x - h, u, s)) / (2 * h);
  CHECK(lognormal_pdf(x, u, s) == doctest::Approx(slope).epsilon(1e-6));
  CHECK(lognormal_pdf(-1, u, s) == 0.0);
}

TEST_CASE("expected max: n = 1 is the log-normal mean")
{
  for (auto [u, s] : {std::pair{0.97, 0.06}, std::pair{0.0, 1.0}, std::pair{-1.0, 0.3}})
    CHECK(expected_max_latency(1, u, s) == doctest::Approx(std::exp(u + s * s / 2)).epsilon(1e-9));
}

TEST_CASE("expected max: more than 30 ms extra for 100 packets")
{
  LatencyModel m; // u=0.97, s=0.06, 100 ms per unit
  const double increase = expected_max_latency_ms(m, 100) - expected_max_latency_ms(m, 1);
  CHECK(increase > 30.0);
}

TEST_CASE("expected max: monotone in n")
{
  double prev = 0;
  for (std::size_t n = 1; n <= 1000; ++n) {
    const double e = expected_max_latency(n, 0.97, 0.06);
    REQUIRE(e >= prev);
    prev = e;
  }
}

TEST_CASE("expected max: quadrature agrees with Monte-Carlo")
{
  for (std::size_t n : {1u, 2u, 10u, 100u}) {
    const double quad = expected_max_latency(n, 0.97, 0.06);
    const double mc = monte_carlo_max(n, 0.97, 0.06, n >= 100 ? 100000 : 1000000, n);
    CHECK(std::abs(mc - quad) / quad < 0.005);
  }
  const double wide = expected_max_latency(20, 0.0, 1.0);
  CHECK(std::abs(monte_carlo_max(20, 0.0, 1.0, 400000, 9) - wide) / wide < 0.005);
}

TEST_CASE("loss-free ratio")
{
  CHECK(lossfree_round_ratio(0.0, 50) == 1.0);
  CHECK(lossfree_round_ratio(1.0, 1) == 0.0);
  CHECK(lossfree_round_ratio(0.01, 10) == doctest::Approx(0.9044).epsilon(1e-4));
  for (double p : {0.001, 0.01, 0.2})
    for (std::size_t a : {1u, 7u, 40u})
      for (std::size_t b : {0u, 3u, 60u})
        CHECK(lossfree_round_ratio(p, a + b)
              == doctest::Approx(lossfree_round_ratio(p, a) * lossfree_round_ratio(p, b)));
  CHECK_THROWS_AS(lossfree_round_ratio(-0.1, 3), Error);
}

TEST_CASE("bandwidth figures")
{
  BandwidthFigures b = bandwidth_per_player(100, 50, 100);
  CHECK(b.formula_total == doctest::Approx(2.0 * 99 / 50));
  CHECK(b.formula_per_player == doctest::Approx(0.99 * 2 / 50));
  CHECK(b.rate_per_player == doctest::Approx(99.0));
  // Each player sends one packet per round and relays n-1 broadcast copies
  // once every n rounds.
  CHECK(b.measured.mean_player.packets_out == doctest::Approx(99.0));
  CHECK(b.measured.mean_player.packets_in == doctest::Approx(99.0));
  CHECK(b.measured.mean_player.bits_out == doctest::Approx(99.0 * 800));
  CHECK(b.measured.aggregator.packets_out == 0.0);

  BandwidthFigures two = bandwidth_per_player(2, 50, 100);
  CHECK(two.measured.mean_player.packets_out == doctest::Approx(two.measured.total_packets / 2));
  CHECK(two.measured.total_packets == doctest::Approx(2 * 50.0));

  TrafficMeasurement fixed = measure_traffic(100, 50, 100, Rotation::fixed_aggregator, 100);
  CHECK(fixed.aggregator.packets_in == doctest::Approx(5000));
  CHECK(fixed.aggregator.packets_out == doctest::Approx(5000));
  CHECK(fixed.aggregator.bits_in == doctest::Approx(4e6));

  CHECK_THROWS_AS(bandwidth_per_player(1, 50, 100), Error);
  CHECK_THROWS_AS(bandwidth_per_player(5, 0, 100), Error);
}
