#include "dcnet/perf_models.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dcnet/error.hpp"

namespace dcnet {

double lognormal_pdf(double x, double u, double s)
{
  if (x <= 0) return 0.0;
  const double z = (std::log(x) - u) / s;
  return std::exp(-0.5 * z * z) / (x * s * std::sqrt(2.0 * std::numbers::pi));
}

double lognormal_cdf(double x, double u, double s)
{
  if (!(x > 0))
    throw Error(Errc::domain_error, "log-normal CDF defined for x > 0");
  if (std::isinf(x)) return 1.0;
  return 0.5 * std::erfc(-(std::log(x) - u) / (s * std::numbers::sqrt2));
}

double expected_max_latency(std::size_t n, double u, double s)
{
  if (n < 1)
    throw Error(Errc::domain_error, "need at least one packet");
  if (!(s > 0))
    throw Error(Errc::domain_error, "log-normal s must be positive");
  using boost::math::quadrature::gauss_kronrod;
  const double nn = static_cast<double>(n);
  auto survival_of_max = [&](double x) {
    if (x <= 0) return 1.0;
    return -std::expm1(nn * std::log(lognormal_cdf(x, u, s)));
  };
  // Below lo the integrand is 1 to double precision; above hi it is negligible.
  const double z_tail = 10.0 + std::sqrt(2.0 * std::log(nn));
  const double lo = std::exp(u - 8.0 * s);
  const double hi = std::exp(u + z_tail * s);
  double err = 0;
  double body = gauss_kronrod<double, 61>::integrate(survival_of_max, lo, hi, 20, 1e-13, &err);
  double head = gauss_kronrod<double, 61>::integrate(survival_of_max, 0.0, lo, 10, 1e-13, &err);
  return head + body;
}

double lossfree_round_ratio(double p, std::size_t n)
{
  if (!(p >= 0 && p <= 1))
    throw Error(Errc::domain_error, "loss probability must lie in [0, 1]");
  return std::pow(1.0 - p, static_cast<double>(n));
}

TrafficMeasurement measure_traffic(std::size_t n, double f, std::size_t packet_bytes,
                                   Rotation rotation, Round rounds)
{
  SimConfig cfg;
  cfg.id = "traffic";
  cfg.players = n;
  cfg.rounds = rounds;
  cfg.rate_hz = f;
  cfg.protocol = {Level::loss_resilient, Variant::list};
  cfg.group = "toy";
  cfg.latency.kind = LatencySpec::Kind::fixed;
  cfg.latency.fixed_ms = 1.0;
  cfg.deadline_ms = 5.0;
  cfg.rotation = rotation;
  cfg.packet_bytes = packet_bytes;
  cfg.record_events = false;
  SimResult res = run_simulation(cfg, make_setup(cfg));

  TrafficMeasurement m;
  const double secs = res.duration_s;
  auto rate = [&](const NodeTraffic& t) {
    return NodeRate{t.packets_out / secs, t.packets_in / secs, 8.0 * t.bytes_out / secs,
                    8.0 * t.bytes_in / secs};
  };
  m.aggregator = rate(res.traffic[0]);
  NodeTraffic sum;
  for (std::size_t i = 1; i <= n; ++i) {
    sum.packets_out += res.traffic[i].packets_out;
    sum.packets_in += res.traffic[i].packets_in;
    sum.bytes_out += res.traffic[i].bytes_out;
    sum.bytes_in += res.traffic[i].bytes_in;
  }
  NodeRate total = rate(sum);
  const double nn = static_cast<double>(n);
  m.mean_player = {total.packets_out / nn, total.packets_in / nn, total.bits_out / nn,
                   total.bits_in / nn};
  m.player_total_out = total.packets_out;
  m.total_packets = total.packets_out + m.aggregator.packets_out;
  return m;
}

BandwidthFigures bandwidth_per_player(std::size_t n, double f, std::size_t packet_bytes)
{
  if (n < 2 || !(f > 0))
    throw Error(Errc::domain_error, "bandwidth model needs n >= 2 and f > 0");
  const double nn = static_cast<double>(n);
  BandwidthFigures out;
  out.formula_total = 2.0 * (nn - 1.0) / f;
  out.formula_per_player = (nn - 1.0) / nn * 2.0 / f;
  out.rate_total = 2.0 * (nn - 1.0) * f;
  out.rate_per_player = (nn - 1.0) / nn * 2.0 * f;
  out.measured = measure_traffic(n, f, packet_bytes, Rotation::round_robin, 2 * n);
  return out;
}

} // namespace dcnet
