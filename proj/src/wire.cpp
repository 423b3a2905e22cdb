#include "dcnet/wire.hpp"

#include "dcnet/error.hpp"

namespace dcnet {

namespace {

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> in) : m_in(in) {}

  std::span<const std::uint8_t> take(std::size_t n)
  {
    if (m_pos + n > m_in.size())
      throw Error(Errc::decode_error, "truncated packet");
    auto out = m_in.subspan(m_pos, n);
    m_pos += n;
    return out;
  }
  std::uint64_t be(std::size_t n) { return get_be(take(n), n); }
  std::size_t pos() const { return m_pos; }
  void expect_end() const
  {
    if (m_pos != m_in.size())
      throw Error(Errc::decode_error, "trailing octets after packet");
  }

private:
  std::span<const std::uint8_t> m_in;
  std::size_t m_pos = 0;
};

void append(Bytes& out, const Bytes& part) { out.insert(out.end(), part.begin(), part.end()); }

} // namespace

Bytes encode_proof(const PositionProof& proof)
{
  if (proof.siblings.size() > 255)
    throw Error(Errc::out_of_range, "proof too deep");
  Bytes out;
  put_be(out, proof.position, 4);
  out.push_back(static_cast<std::uint8_t>(proof.siblings.size()));
  for (const auto& s : proof.siblings) out.insert(out.end(), s.digest.begin(), s.digest.end());
  Bytes sides((proof.siblings.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < proof.siblings.size(); ++i)
    if (proof.siblings[i].side == Side::left) sides[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  append(out, sides);
  return out;
}

PositionProof decode_proof(std::span<const std::uint8_t> bytes, std::size_t* consumed)
{
  Reader r(bytes);
  PositionProof proof;
  proof.position = static_cast<std::uint32_t>(r.be(4));
  std::size_t count = r.take(1)[0];
  proof.siblings.resize(count);
  for (auto& s : proof.siblings) {
    auto d = r.take(32);
    std::copy(d.begin(), d.end(), s.digest.begin());
  }
  auto sides = r.take((count + 7) / 8);
  for (std::size_t i = 0; i < count; ++i)
    proof.siblings[i].side = (sides[i / 8] >> (i % 8)) & 1 ? Side::left : Side::right;
  for (std::size_t i = count; i < sides.size() * 8; ++i)
    if ((sides[i / 8] >> (i % 8)) & 1)
      throw Error(Errc::decode_error, "stray side bits");
  if (consumed) *consumed = r.pos();
  else r.expect_end();
  return proof;
}

Bytes encode_collection(const GroupParams& params, const ProtocolConfig& config,
                        const CollectionPacket& pkt)
{
  Bytes out;
  put_be(out, pkt.round, 8);
  put_be(out, pkt.sender, 2);
  append(out, encode_scalar(params, pkt.opening));
  if (config.carries_blinding()) {
    if (!pkt.blinding) throw Error(Errc::config_mismatch, "packet lacks blinding scalar");
    append(out, encode_scalar(params, *pkt.blinding));
  }
  if (config.carries_proof()) {
    if (!pkt.proof) throw Error(Errc::config_mismatch, "packet lacks position proof");
    append(out, encode_proof(*pkt.proof));
  }
  return out;
}

CollectionPacket decode_collection(const GroupParams& params, const ProtocolConfig& config,
                                   std::span<const std::uint8_t> bytes)
{
  const std::size_t w = params.scalar_bytes();
  Reader r(bytes);
  CollectionPacket pkt;
  pkt.round = r.be(8);
  pkt.sender = static_cast<PlayerId>(r.be(2));
  pkt.opening = decode_scalar(params, r.take(w));
  if (config.carries_blinding()) pkt.blinding = decode_scalar(params, r.take(w));
  if (config.carries_proof()) {
    std::size_t used = 0;
    pkt.proof = decode_proof(bytes.subspan(r.pos()), &used);
    r.take(used);
  }
  r.expect_end();
  return pkt;
}

Bytes encode_broadcast(const GroupParams& params, const ProtocolConfig& config,
                       const BroadcastPacket& pkt)
{
  Bytes out;
  put_be(out, pkt.round, 8);
  if (config.broadcasts_list()) {
    put_be(out, pkt.received.size(), 2);
    for (PlayerId i : pkt.received) put_be(out, i, 2);
  }
  append(out, encode_scalar(params, pkt.sum));
  return out;
}

BroadcastPacket decode_broadcast(const GroupParams& params, const ProtocolConfig& config,
                                 std::span<const std::uint8_t> bytes)
{
  Reader r(bytes);
  BroadcastPacket pkt;
  pkt.round = r.be(8);
  if (config.broadcasts_list()) {
    std::size_t count = r.be(2);
    pkt.received.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      auto id = static_cast<PlayerId>(r.be(2));
      if (!pkt.received.empty() && id <= pkt.received.back())
        throw Error(Errc::decode_error, "received list not strictly ascending");
      pkt.received.push_back(id);
    }
  }
  pkt.sum = decode_scalar(params, r.take(params.scalar_bytes()));
  r.expect_end();
  return pkt;
}

std::size_t collection_size(const GroupParams& params, const ProtocolConfig& config,
                            std::size_t tree_height)
{
  std::size_t size = 8 + 2 + params.scalar_bytes();
  if (config.carries_blinding()) size += params.scalar_bytes();
  if (config.carries_proof()) size += 4 + 1 + 32 * tree_height + (tree_height + 7) / 8;
  return size;
}

std::size_t broadcast_size(const GroupParams& params, const ProtocolConfig& config,
                           std::size_t list_length)
{
  std::size_t size = 8 + params.scalar_bytes();
  if (config.broadcasts_list()) size += 2 + 2 * list_length;
  return size;
}

} // namespace dcnet
