#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dcnet {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(const std::string& hex);

// Big-endian append helpers used by the wire and PRF encoders.
inline void put_be(Bytes& out, std::uint64_t value, std::size_t width)
{
  for (std::size_t i = width; i-- > 0;)
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

inline std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t width)
{
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i)
    v = (v << 8) | in[i];
  return v;
}

} // namespace dcnet
