#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "dcnet/group.hpp"

namespace dcnet {

// A message scalar packs [length: 2][payload][checksum: 2][zero padding] as a
// big-endian integer of floor((bits(q) - 1) / 8) octets, so it is always < q.
// The checksum is the first two octets of SHA-256(length || payload). The zero
// scalar is reserved for silence.

/// Payload octets that fit in one frame (0 when the group is too small).
std::size_t frame_capacity(const GroupParams& params);

/// Throws Errc::out_of_range if the payload exceeds frame_capacity.
Scalar encode_frame(const GroupParams& params, std::span<const std::uint8_t> payload);

/// Payload of a well-formed frame; silence decodes to an empty payload.
/// nullopt for anything else.
std::optional<Bytes> decode_frame(const GroupParams& params, const Scalar& m);

inline bool is_plausible_frame(const GroupParams& params, const Scalar& m)
{
  return decode_frame(params, m).has_value();
}

} // namespace dcnet
