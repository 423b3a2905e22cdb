#pragma once

#include <span>

#include "dcnet/protocol.hpp"

namespace dcnet {

// Collection packet:
//   round (8, BE) | sender (2, BE) | O (w) | [s (w)] | [proof]
// Proof:
//   position (4, BE) | count (1) | count * 32-octet digests |
//   ceil(count / 8) side octets, bit i (LSB first) set when sibling i is on the left
// Broadcast packet:
//   round (8, BE) | [count (2, BE) | count * sender (2, BE)] | X (w)
// w = ceil(bits(q) / 8). Optional parts are present according to ProtocolConfig.

Bytes encode_proof(const PositionProof& proof);
PositionProof decode_proof(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

Bytes encode_collection(const GroupParams& params, const ProtocolConfig& config,
                        const CollectionPacket& pkt);
CollectionPacket decode_collection(const GroupParams& params, const ProtocolConfig& config,
                                   std::span<const std::uint8_t> bytes);

Bytes encode_broadcast(const GroupParams& params, const ProtocolConfig& config,
                       const BroadcastPacket& pkt);
BroadcastPacket decode_broadcast(const GroupParams& params, const ProtocolConfig& config,
                                 std::span<const std::uint8_t> bytes);

std::size_t collection_size(const GroupParams& params, const ProtocolConfig& config,
                            std::size_t tree_height);
std::size_t broadcast_size(const GroupParams& params, const ProtocolConfig& config,
                           std::size_t list_length);

} // namespace dcnet
