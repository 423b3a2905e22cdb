#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcnet/protocol.hpp"

namespace dcnet {

// ---------------------------------------------------------------------------
// Channel models

struct GilbertElliottParams {
  double p_good_to_bad = 0.01;
  double p_bad_to_good = 0.5;
  double loss_good = 0.0;
  double loss_bad = 1.0;
};

enum class ChannelState : std::uint8_t { good, bad };

struct ChannelStep {
  bool lost = false;
  ChannelState next = ChannelState::good;
};

/// Loss is drawn from the current state's error rate, then the state moves.
ChannelStep gilbert_elliott_step(ChannelState state, const GilbertElliottParams& params, Rng& rng);

/// Long-run loss rate of the chain.
double gilbert_elliott_stationary_loss(const GilbertElliottParams& params);

struct LossSpec {
  enum class Kind : std::uint8_t { none, bernoulli, gilbert_elliott };
  Kind kind = Kind::none;
  double p = 0.0;
  GilbertElliottParams ge;
};

/// Stateful per-link loss process.
class LossChannel {
public:
  LossChannel() = default;
  explicit LossChannel(LossSpec spec) : m_spec(spec) {}

  bool drop(Rng& rng);

private:
  LossSpec m_spec;
  ChannelState m_state = ChannelState::good;
};

struct LatencySpec {
  enum class Kind : std::uint8_t { lognormal, fixed };
  Kind kind = Kind::lognormal;
  double u = 0.97;
  double s = 0.06;
  double unit_ms = 100.0; // one log-normal unit in milliseconds
  double fixed_ms = 20.0;

  double sample_ms(Rng& rng) const;
};

// ---------------------------------------------------------------------------
// Scenario

enum class AdversaryStrategy : std::uint8_t {
  random_opening,
  replayed_opening,
  wrong_round_proof,
  drop_silently,
};

const char* to_string(AdversaryStrategy s) noexcept;
AdversaryStrategy parse_strategy(const std::string& text);

struct Adversary {
  PlayerId player = 0;
  AdversaryStrategy strategy = AdversaryStrategy::random_opening;
};

enum class Rotation : std::uint8_t { fixed_aggregator, round_robin };

/// Aggregator of round j under round-robin rotation: ((j-1) mod n) + 1.
PlayerId rotate_aggregator(Round round, std::size_t players);

struct SimConfig {
  std::string id = "scenario";
  std::size_t players = 5;
  Round rounds = 100;
  double rate_hz = 50.0; // rounds per second
  ProtocolConfig protocol{};
  std::string group = "toy"; // toy | p256 | generate:<bits> | path to a group file
  LatencySpec latency{};
  LossSpec uplink_loss{};
  bool broadcast_loss = true; // apply the same loss model to each broadcast copy
  std::vector<Adversary> adversaries;
  Rotation rotation = Rotation::fixed_aggregator;
  double deadline_ms = 400.0; // wait budget after the round starts
  std::uint64_t seed = 1;
  std::size_t packet_bytes = 0; // 0: use real wire sizes
  PlayerId correspondent_a = 1;
  PlayerId correspondent_b = 2;
  double speak_probability = 1.0;
  std::size_t payload_bytes = 16;
  std::size_t max_missing = 2; // list-free recovery search bound
  double audit_delay_ms = 0.0;  // optimistic variant: detection to ban
  bool record_events = true;

  /// Throws Errc::config_mismatch on inconsistent settings.
  void validate() const;
};

/// Group named by `cfg.group`.
GroupParams resolve_group(const std::string& spec);

/// Dealer setup for a scenario.
SetupBundle make_setup(const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Traces

enum class Delivery : std::uint8_t { not_sent, delivered, lost, late };
const char* to_string(Delivery d) noexcept;

enum class Outcome : std::uint8_t {
  ok,             // recovered exactly what the peer sent
  garbled,        // recovered something else
  peer_absent,    // peer's packet not in L, reported as such
  broadcast_lost, // the broadcast never reached this correspondent
  undecodable,    // list-free search found zero or several candidates
};
const char* to_string(Outcome o) noexcept;

struct PacketRecord {
  PlayerId player = 0;
  bool adversarial = false;
  Delivery delivery = Delivery::not_sent;
  double sent_at = 0;
  double arrived_at = 0; // delivered or late only
  std::optional<Verdict> verdict;
  std::size_t bytes = 0;
};

struct RecoveryRecord {
  PlayerId correspondent = 0;
  Outcome outcome = Outcome::broadcast_lost;
  double at = 0;
};

struct RoundCounters {
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_lost = 0;
  std::uint64_t packets_late = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t broadcasts_sent = 0;
  std::uint64_t broadcasts_delivered = 0;
  std::uint64_t broadcasts_lost = 0;
  std::uint64_t broadcast_bytes = 0;

  friend bool operator==(const RoundCounters&, const RoundCounters&) = default;
};

struct RoundTrace {
  Round round = 0;
  PlayerId aggregator = 0; // 0: dedicated aggregator node
  double start_ms = 0;
  double deadline_ms = 0;
  std::vector<PacketRecord> packets; // one per expected sender, ascending id
  std::vector<PlayerId> received;    // L
  Scalar sum;                        // X
  std::vector<RecoveryRecord> recoveries; // correspondent a then b
  RoundCounters counters;
  std::vector<PlayerId> broadcast_missed; // recipients whose broadcast copy was lost
  std::vector<PlayerId> flagged;          // optimistic audit result, if any

  const PacketRecord* packet_of(PlayerId player) const;
  const RecoveryRecord* recovery_of(PlayerId player) const;
};

struct NodeTraffic {
  std::uint64_t packets_out = 0;
  std::uint64_t packets_in = 0;
  std::uint64_t bytes_out = 0;
  std::uint64_t bytes_in = 0;

  friend bool operator==(const NodeTraffic&, const NodeTraffic&) = default;
};

struct SimEvent {
  double time = 0;
  std::string kind;
  Round round = 0;
  int from = -1;
  int to = -1;
  std::string detail;
};

struct SimResult {
  std::vector<RoundTrace> rounds;   // [round-1]
  std::vector<NodeTraffic> traffic; // [0] dedicated aggregator, [i] player i
  std::vector<SimEvent> events;
  double duration_s = 0;
};

/// Runs every round of the scenario through a single-threaded event loop.
/// Per-link random streams are derived from cfg.seed, so the result is a
/// pure function of (cfg, setup).
SimResult run_simulation(const SimConfig& cfg, const SetupBundle& setup);

/// One JSON object per event.
std::string events_jsonl(const SimResult& result);

} // namespace dcnet
