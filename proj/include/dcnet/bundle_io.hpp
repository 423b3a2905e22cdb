#pragma once

#include <filesystem>
#include <string>

#include "dcnet/protocol.hpp"

namespace dcnet {

// A setup directory holds one file per role:
//
//   group.txt                   public group parameters
//   manifest.json               players, rounds, level
//   aggregator.json             roots or commitments, never scalars
//   player-<i>.json             seed of player i (and zero-sum k values for the last player)
//   correspondent-<i>.json      alpha plus every player's seed, for each correspondent
//
// Scalars, elements and digests are lowercase hex strings.

std::string aggregator_view_json(const GroupParams& params, const AggregatorView& view);
AggregatorView parse_aggregator_view(const std::string& text, GroupParams* params = nullptr);

std::string player_view_json(const GroupParams& params, const PlayerView& view);
PlayerView parse_player_view(const std::string& text, GroupParams* params = nullptr);

std::string correspondent_view_json(const GroupParams& params, const CorrespondentView& view,
                                    Role role);
CorrespondentView parse_correspondent_view(const std::string& text, GroupParams* params = nullptr,
                                           Role* role = nullptr);

/// Throws Errc::io_error on filesystem failures.
void write_setup(const std::filesystem::path& dir, const SetupBundle& bundle);

/// Reads a directory written by write_setup. Player trees are left empty and
/// rebuilt on demand. Throws Errc::decode_error on malformed or inconsistent files.
SetupBundle read_setup(const std::filesystem::path& dir);

/// True when the aggregator's roots or commitments equal what the
/// correspondent view recomputes from the seeds.
bool verification_material_consistent(const SetupBundle& bundle);

} // namespace dcnet
