#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <memory>
#include <vector>

#include "dcnet/error.hpp"
#include "dcnet/group.hpp"
#include "dcnet/merkle.hpp"

namespace dcnet {

using PlayerId = std::uint16_t;
using Round = std::uint64_t;

using Seed = std::array<std::uint8_t, 32>;

struct SecretPair {
  Scalar k;
  Scalar r;

  friend bool operator==(const SecretPair&, const SecretPair&) = default;
};

enum class Level : std::uint8_t {
  simple = 1,         // zero-sum keys, every packet required
  loss_resilient = 2, // received list L
  verified = 3,       // Pedersen openings against per-round commitments
  merkle = 4,         // openings plus position proofs against per-player roots
};

/// Pseudorandom pair for (player, round). Each lane is HMAC-SHA256 keyed by
/// the seed over `"dcnet/pair" || player || round || lane || attempt || block`,
/// truncated to bits(q) and rejection sampled into [0, q).
SecretPair derive_pair(const GroupParams& params, const Seed& seed, PlayerId player, Round round);

/// n keys with sum zero mod q; the first n-1 come from `next`.
template <typename Source>
  requires std::invocable<Source&> && std::convertible_to<std::invoke_result_t<Source&>, Scalar>
std::vector<Scalar> dealer_setup_zero_sum(const GroupParams& params, std::size_t n, Source&& next)
{
  if (n < 3)
    throw Error(Errc::out_of_range, "zero-sum setup needs at least 3 players");
  if (mpz_class(static_cast<unsigned long>(n)) > params.q)
    throw Error(Errc::group_too_small, "more players than group order");
  std::vector<Scalar> keys;
  keys.reserve(n);
  Scalar sum(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    keys.push_back(reduce(params, Scalar(next()).value));
    sum = add(params, sum, keys.back());
  }
  keys.push_back(neg(params, sum));
  return keys;
}

std::vector<Scalar> dealer_setup_zero_sum(const GroupParams& params, std::size_t n,
                                          std::uint64_t rng_seed);

/// What an ordinary player holds: its seed, plus for zero-sum streams the
/// dealer-fixed k values of the balancing player (empty otherwise).
struct PlayerView {
  PlayerId index = 0;
  Round rounds = 0;
  Seed seed{};
  std::vector<Scalar> fixed_k;
  /// Dealer-built tree over this player's commitments; rebuilt from the seed
  /// when absent (e.g. after loading from disk).
  std::shared_ptr<const MerkleSchedule> tree;

  SecretPair pair(const GroupParams& params, Round round) const;
};

/// What each correspondent holds. Every pair of every player is derivable
/// from `seeds` (plus `fixed_k` for the balancing player of a zero-sum stream).
struct CorrespondentView {
  PlayerId index = 0;
  PlayerId peer = 0;
  Round rounds = 0;
  Scalar alpha;
  std::vector<Seed> seeds;
  std::vector<Scalar> fixed_k; // applies to player seeds.size()
  SecretPair pair(const GroupParams& params, PlayerId player, Round round) const;
};

/// Verification material for the aggregator: never scalars, only
/// commitments (level 3) or Merkle roots (level 4).
struct AggregatorView {
  Level level = Level::merkle;
  std::size_t players = 0;
  Round rounds = 0;
  Round padded_rounds = 0;
  std::vector<Digest> roots;                    // [player-1]
  std::vector<std::vector<Commitment>> commitments; // [player-1][round-1]
};

struct StreamOptions {
  std::size_t players = 5;
  Round rounds = 1;
  Level level = Level::merkle;
  PlayerId correspondent_a = 1;
  PlayerId correspondent_b = 2;
  std::uint64_t rng_seed = 1;
};

struct SetupBundle {
  GroupParams public_params; // no trapdoor
  StreamOptions options;
  std::vector<PlayerView> players; // [player-1]
  CorrespondentView view_a;
  CorrespondentView view_b;
  AggregatorView aggregator;

  GroupParams trapdoor_params() const;
};

/// Smallest power of two >= rounds.
Round padded_length(Round rounds);

/// Commitments of one player's schedule, padded with commit(0, 0).
std::vector<Commitment> schedule_commitments(const GroupParams& params, const PlayerView& view,
                                             Round padded);

/// Trusted dealer: draws alpha and seeds from `rng_seed`, then builds
/// per-role views. Level 1 streams get per-round zero-sum keys by fixing the
/// last player's k; level 3 hands the aggregator every commitment; level 4
/// hands it one Merkle root per player.
SetupBundle dealer_setup_stream(const GroupParams& base, const StreamOptions& options);

} // namespace dcnet
