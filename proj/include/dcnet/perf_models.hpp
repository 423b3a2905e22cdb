#pragma once

#include <cstddef>

#include "dcnet/netsim.hpp"

namespace dcnet {

/// Log-normal packet latency; `unit_ms` converts model units to milliseconds.
struct LatencyModel {
  double u = 0.97;
  double s = 0.06;
  double unit_ms = 100.0;
};

double lognormal_pdf(double x, double u, double s);

/// Standard log-normal CDF; throws Errc::domain_error for x <= 0.
double lognormal_cdf(double x, double u, double s);

/// E[max of n iid log-normals] = integral over [0, inf) of 1 - F(x)^n,
/// by adaptive Gauss-Kronrod quadrature. Model units.
double expected_max_latency(std::size_t n, double u, double s);

inline double expected_max_latency_ms(const LatencyModel& m, std::size_t n)
{
  return expected_max_latency(n, m.u, m.s) * m.unit_ms;
}

/// (1 - p)^n: probability that none of n packets is lost.
double lossfree_round_ratio(double p, std::size_t n);

/// Measured traffic of one node, per second of simulated time.
struct NodeRate {
  double packets_out = 0;
  double packets_in = 0;
  double bits_out = 0;
  double bits_in = 0;
};

struct TrafficMeasurement {
  NodeRate aggregator;        // dedicated aggregator (fixed mode only)
  NodeRate mean_player;       // averaged over players
  double total_packets = 0;   // packets per second sent by all nodes
  double player_total_out = 0; // packets per second sent by all players
};

/// Runs a lossless simulation of `rounds` rounds with fixed-size packets and
/// reports per-node rates.
TrafficMeasurement measure_traffic(std::size_t n, double f, std::size_t packet_bytes,
                                   Rotation rotation, Round rounds);

struct BandwidthFigures {
  // Formula values as written: b(n) = 2(n-1)/f and p(n) = b(n)/n.
  double formula_total = 0;
  double formula_per_player = 0;
  // Same quantities scaled by f instead of divided by it (packets per second).
  double rate_total = 0;
  double rate_per_player = 0;
  // Simulator measurement under round-robin rotation; authoritative.
  TrafficMeasurement measured;
};

BandwidthFigures bandwidth_per_player(std::size_t n, double f, std::size_t packet_bytes);

} // namespace dcnet
