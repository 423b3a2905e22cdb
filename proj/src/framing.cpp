#include "dcnet/framing.hpp"

#include <algorithm>

#include "dcnet/error.hpp"

namespace dcnet {

namespace {

constexpr std::size_t overhead = 4;

std::size_t frame_width(const GroupParams& params) { return (params.order_bits() - 1) / 8; }

std::array<std::uint8_t, 2> checksum(std::span<const std::uint8_t> header_and_payload)
{
  Digest d = sha256(header_and_payload);
  return {d[0], d[1]};
}

} // namespace

std::size_t frame_capacity(const GroupParams& params)
{
  std::size_t w = frame_width(params);
  return w > overhead ? w - overhead : 0;
}

Scalar encode_frame(const GroupParams& params, std::span<const std::uint8_t> payload)
{
  const std::size_t width = frame_width(params);
  if (width <= overhead || payload.size() > width - overhead)
    throw Error(Errc::out_of_range, "payload of " + std::to_string(payload.size())
                                        + " octets exceeds frame capacity "
                                        + std::to_string(frame_capacity(params)));
  Bytes buf;
  buf.reserve(width);
  put_be(buf, payload.size(), 2);
  buf.insert(buf.end(), payload.begin(), payload.end());
  auto sum = checksum(buf);
  buf.insert(buf.end(), sum.begin(), sum.end());
  buf.resize(width, 0);
  return Scalar(from_bytes(buf));
}

std::optional<Bytes> decode_frame(const GroupParams& params, const Scalar& m)
{
  if (m.value == 0) return Bytes{};
  const std::size_t width = frame_width(params);
  if (width <= overhead || m.value < 0) return std::nullopt;
  if (mpz_sizeinbase(m.value.get_mpz_t(), 256) > width) return std::nullopt;
  Bytes buf = to_bytes(m.value, width);
  std::size_t len = static_cast<std::size_t>(get_be(buf, 2));
  if (len > width - overhead) return std::nullopt;
  std::span<const std::uint8_t> framed(buf.data(), 2 + len);
  auto expect = checksum(framed);
  if (buf[2 + len] != expect[0] || buf[3 + len] != expect[1]) return std::nullopt;
  if (!std::all_of(buf.begin() + static_cast<std::ptrdiff_t>(4 + len), buf.end(),
                   [](std::uint8_t b) { return b == 0; }))
    return std::nullopt;
  return Bytes(buf.begin() + 2, buf.begin() + static_cast<std::ptrdiff_t>(2 + len));
}

} // namespace dcnet
