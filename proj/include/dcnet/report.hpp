#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "dcnet/netsim.hpp"
#include "dcnet/perf_models.hpp"

namespace dcnet {

/// Aggregates computed from round traces alone, plus the closed-form values
/// they are compared against.
struct RunReport {
  std::string scenario;
  Round rounds = 0;
  std::size_t players = 0;
  double mean_senders = 0; // packets sent per round

  // Loss
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_lost = 0;
  std::uint64_t packets_late = 0;
  std::uint64_t lossfree_rounds = 0; // no packet lost or late
  double lossfree_ratio = 0;
  double model_lossfree_ratio = -1; // -1 when the loss model has no closed form

  // Correctness, one entry per correspondent per round
  std::array<std::uint64_t, 5> outcomes{}; // indexed by Outcome
  std::uint64_t checked = 0;    // both correspondents' packets accepted
  std::uint64_t mismatches = 0; // checked recoveries that were not ok
  // Rounds where every sent packet was honest and accepted: any recovery
  // other than ok, undecodable or broadcast_lost counts here.
  std::uint64_t clean_rounds = 0;
  std::uint64_t clean_mismatches = 0;
  std::uint64_t affected_rounds = 0;  // an adversarial packet was accepted
  std::uint64_t affected_garbled = 0; // ... and some recovery came out garbled

  // Rejections by verdict name, accepted excluded
  std::map<std::string, std::uint64_t> rejections;
  std::vector<PlayerId> flagged; // union of audit results

  // Latency
  double mean_latency_ms = 0;
  std::uint64_t complete_rounds = 0; // every sent packet arrived
  double mean_last_arrival_ms = 0;   // over complete rounds
  double model_last_arrival_ms = -1; // expected max for mean_senders, -1 if not log-normal

  // Bandwidth, per second of simulated time
  NodeRate aggregator; // dedicated node; zero under rotation
  NodeRate mean_player;
  double formula_per_player = 0; // (n-1)/n * 2/f as written
  double rate_per_player = 0;    // (n-1)/n * 2f
};

/// Per-node traffic recomputed from traces; matches SimResult::traffic.
std::vector<NodeTraffic> traffic_from_traces(const std::vector<RoundTrace>& rounds,
                                             std::size_t players);

RunReport summarize(const SimConfig& cfg, const std::vector<RoundTrace>& rounds);

/// `metric,value` rows under a fixed header.
std::string report_csv(const RunReport& report);

std::string rounds_jsonl(const std::vector<RoundTrace>& rounds);
std::vector<RoundTrace> parse_rounds_jsonl(const std::string& text);

} // namespace dcnet
