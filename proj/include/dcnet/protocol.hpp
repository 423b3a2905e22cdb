#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "dcnet/group.hpp"
#include "dcnet/key_schedule.hpp"
#include "dcnet/merkle.hpp"

namespace dcnet {

enum class Variant : std::uint8_t {
  list,      // broadcast carries L
  no_list,   // broadcast carries only X; recipients search over missing sets
  optimistic // no per-packet proofs; faults found by an out-of-band audit
};

enum class Role : std::uint8_t { bystander, correspondent_a, correspondent_b };

struct ProtocolConfig {
  Level level = Level::merkle;
  Variant variant = Variant::list;

  bool carries_blinding() const
  {
    return variant != Variant::optimistic && (level == Level::verified || level == Level::merkle);
  }
  bool carries_proof() const { return variant != Variant::optimistic && level == Level::merkle; }
  bool broadcasts_list() const { return variant != Variant::no_list && level != Level::simple; }
};

struct CollectionPacket {
  Round round = 0;
  PlayerId sender = 0;
  Scalar opening;                    // O
  std::optional<Scalar> blinding;    // s, levels 3-4
  std::optional<PositionProof> proof; // z, level 4

  friend bool operator==(const CollectionPacket&, const CollectionPacket&) = default;
};

struct BroadcastPacket {
  Round round = 0;
  std::vector<PlayerId> received; // L, ascending
  Scalar sum;                     // X

  friend bool operator==(const BroadcastPacket&, const BroadcastPacket&) = default;
};

/// Honest player. Emits its pad for each round, with the opening and
/// position proof the protocol level calls for.
class Player {
public:
  Player(GroupParams params, ProtocolConfig config, PlayerView view);
  virtual ~Player() = default;

  PlayerId index() const { return m_view.index; }
  virtual Role role() const { return Role::bystander; }
  const ProtocolConfig& config() const { return m_config; }

  /// Throws Errc::schedule_exhausted past the last round.
  CollectionPacket emit(Round round) const;

protected:
  CollectionPacket packet_for(Round round, const Scalar& message) const;

  GroupParams m_params;
  ProtocolConfig m_config;
  PlayerView m_view;
};

struct ListFreeRecovery {
  bool decoded = false;
  Scalar message;                  // meaningful when decoded
  std::vector<PlayerId> missing;   // inferred missing set when decoded
  bool peer_absent = false;        // decoded with the peer inside the missing set
  std::size_t candidates = 0;      // plausible candidates found
};

using Plausibility = std::function<bool(const Scalar&)>;

/// One of the two communicating players. Holds the trapdoor and every
/// player's keys, remembers what it sent, and recovers the peer's messages.
class Correspondent : public Player {
public:
  Correspondent(GroupParams trapdoor_params, ProtocolConfig config, PlayerView own,
                CorrespondentView keys, Role role);

  Role role() const override { return m_role; }
  PlayerId peer() const { return m_keys.peer; }
  const CorrespondentView& keys() const { return m_keys; }

  /// Silence (nullopt or zero) yields exactly the bystander packet.
  CollectionPacket emit(Round round, const std::optional<Scalar>& message);

  /// Message this correspondent embedded in `round` (zero if silent or never sent).
  Scalar sent(Round round) const;
  bool has_sent(Round round) const { return m_sent.count(round) != 0; }

  /// X minus the keys of L minus our own message when we are in L.
  Scalar strip_keys(const BroadcastPacket& bc) const;

  /// nullopt when the peer's packet is not in L.
  std::optional<Scalar> recover_message(const BroadcastPacket& bc) const;

  /// Tries every missing set of size <= max_missing among `expected` and
  /// keeps the candidates accepted by `plausible` (a peer-missing candidate
  /// must be exactly zero). Decodes only when exactly one survives.
  ListFreeRecovery recover_without_list(const Scalar& sum, Round round, std::size_t max_missing,
                                        std::span<const PlayerId> expected,
                                        const Plausibility& plausible) const;

private:
  Role m_role;
  CorrespondentView m_keys;
  std::unordered_map<Round, Scalar> m_sent;
};

enum class Verdict : std::uint8_t {
  accepted,
  bad_opening,
  bad_proof,
  missing_field,
  duplicate_sender,
  wrong_round,
  late_arrival,
  unknown_sender,
  banned,
};

const char* to_string(Verdict v) noexcept;

/// Honest-but-curious aggregator. Holds only public verification material;
/// several rounds may be open at once.
class Aggregator {
public:
  Aggregator(GroupParams public_params, ProtocolConfig config,
             std::shared_ptr<const AggregatorView> view);

  /// Opens `round` for the given senders until `deadline` (simulation ms).
  void open_round(Round round, std::vector<PlayerId> expected, double deadline);
  bool is_open(Round round) const { return m_open.count(round) != 0; }

  Verdict ingest(const CollectionPacket& pkt, double arrival_time);

  /// Sums the accepted openings and closes the round.
  BroadcastPacket finalize(Round round);

  /// Accepted packets of a finalized round, kept for optimistic audits.
  const std::vector<CollectionPacket>& published_log(Round round) const;

  void ban(PlayerId player) { m_banned.insert(player); }
  const std::set<PlayerId>& banned() const { return m_banned; }

private:
  Verdict verify(const CollectionPacket& pkt) const;

  struct Buffer {
    double deadline = 0;
    std::set<PlayerId> expected;
    std::map<PlayerId, CollectionPacket> accepted;
  };

  GroupParams m_params;
  ProtocolConfig m_config;
  std::shared_ptr<const AggregatorView> m_view;
  std::map<Round, Buffer> m_open;
  std::set<Round> m_closed;
  std::map<Round, std::vector<CollectionPacket>> m_logs;
  std::set<PlayerId> m_banned;
};

/// Players other than the two correspondents whose published opening differs
/// from their key for that round.
std::set<PlayerId> audit_round(const GroupParams& params, std::span<const CollectionPacket> log,
                               const CorrespondentView& keys, Round round);

} // namespace dcnet
