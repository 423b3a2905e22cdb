#include <doctest.h>

#include "dcnet/error.hpp"
#include "dcnet/framing.hpp"
#include "dcnet/wire.hpp"

using namespace dcnet;

namespace {

GroupParams big() { return with_trapdoor(base_group_256(), Scalar(31337)); }

PositionProof random_proof(std::size_t height, std::uint32_t position, Rng& rng)
{
  PositionProof p;
  p.position = position;
  p.siblings.resize(height);
  for (auto& s : p.siblings) {
    for (auto& b : s.digest) b = static_cast<std::uint8_t>(rng());
    s.side = rng() & 1 ? Side::left : Side::right;
  }
  return p;
}

} // namespace

TEST_CASE("frame capacity follows the order size")
{
  CHECK(frame_capacity(toy_group()) == 0);
  GroupParams gp = big();
  CHECK(gp.order_bits() == 255);
  CHECK(frame_capacity(gp) == 27);
}

TEST_CASE("frames round trip and stay below q")
{
  GroupParams gp = big();
  Rng rng(1);
  for (std::size_t len = 0; len <= frame_capacity(gp); ++len) {
    Bytes payload(len);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    Scalar m = encode_frame(gp, payload);
    CHECK(m.value < gp.q);
    CHECK(m.value != 0);
    auto back = decode_frame(gp, m);
    REQUIRE(back);
    CHECK(*back == payload);
  }
  CHECK(decode_frame(gp, Scalar(0)) == Bytes{});
  CHECK_THROWS_AS(encode_frame(gp, Bytes(28)), Error);
}

TEST_CASE("frame layout")
{
  GroupParams gp = big();
  Bytes payload{0xaa, 0xbb};
  Bytes raw = to_bytes(encode_frame(gp, payload).value, 31);
  CHECK(raw[0] == 0);
  CHECK(raw[1] == 2);
  CHECK(raw[2] == 0xaa);
  CHECK(raw[3] == 0xbb);
  Digest d = sha256(Bytes{0, 2, 0xaa, 0xbb});
  CHECK(raw[4] == d[0]);
  CHECK(raw[5] == d[1]);
  for (std::size_t i = 6; i < raw.size(); ++i) CHECK(raw[i] == 0);
}

TEST_CASE("random scalars are rarely plausible frames")
{
  GroupParams gp = big();
  Rng rng(2);
  int plausible = 0;
  for (int t = 0; t < 20000; ++t)
    if (is_plausible_frame(gp, random_scalar(gp, rng))) ++plausible;
  CHECK(plausible == 0);

  Scalar m = encode_frame(gp, Bytes{1, 2, 3});
  CHECK_FALSE(is_plausible_frame(gp, add(gp, m, Scalar(1) )));
}

TEST_CASE("collection packet layout, toy group")
{
  GroupParams gp = toy_group();
  CollectionPacket pkt;
  pkt.round = 0x0102;
  pkt.sender = 3;
  pkt.opening = Scalar(6);
  pkt.blinding = Scalar(4);
  PositionProof proof;
  proof.position = 2;
  proof.siblings.resize(2);
  proof.siblings[0].digest.fill(0x11);
  proof.siblings[0].side = Side::left;
  proof.siblings[1].digest.fill(0x22);
  proof.siblings[1].side = Side::right;
  pkt.proof = proof;

  Bytes expect{0, 0, 0, 0, 0, 0, 1, 2, 0, 3, 6, 4, 0, 0, 0, 2, 2};
  expect.insert(expect.end(), 32, 0x11);
  expect.insert(expect.end(), 32, 0x22);
  expect.push_back(0x01);

  ProtocolConfig p4{Level::merkle, Variant::list};
  CHECK(encode_collection(gp, p4, pkt) == expect);
  CHECK(collection_size(gp, p4, 2) == expect.size());
  CHECK(decode_collection(gp, p4, expect) == pkt);

  ProtocolConfig p2{Level::loss_resilient, Variant::list};
  Bytes short_form = encode_collection(gp, p2, pkt);
  CHECK(short_form == Bytes(expect.begin(), expect.begin() + 11));
  CHECK(collection_size(gp, p2, 2) == 11);

  ProtocolConfig optimistic{Level::merkle, Variant::optimistic};
  CHECK(collection_size(gp, optimistic, 2) == 11);
}

TEST_CASE("collection packets round trip at every level")
{
  GroupParams gp = big();
  Rng rng(3);
  for (Level level : {Level::simple, Level::loss_resilient, Level::verified, Level::merkle})
    for (int t = 0; t < 50; ++t) {
      ProtocolConfig cfg{level, Variant::list};
      const std::size_t height = rng() % 12;
      CollectionPacket pkt;
      pkt.round = rng();
      pkt.sender = static_cast<PlayerId>(rng());
      pkt.opening = random_scalar(gp, rng);
      if (cfg.carries_blinding()) pkt.blinding = random_scalar(gp, rng);
      if (cfg.carries_proof()) pkt.proof = random_proof(height, static_cast<std::uint32_t>(rng()), rng);
      Bytes wire = encode_collection(gp, cfg, pkt);
      CHECK(wire.size() == collection_size(gp, cfg, height));
      CHECK(decode_collection(gp, cfg, wire) == pkt);
    }
}

TEST_CASE("malformed collection packets are refused")
{
  GroupParams gp = toy_group();
  ProtocolConfig p4{Level::merkle, Variant::list};
  Rng rng(4);
  CollectionPacket pkt;
  pkt.round = 1;
  pkt.sender = 1;
  pkt.opening = Scalar(1);
  pkt.blinding = Scalar(2);
  pkt.proof = random_proof(3, 1, rng);
  Bytes wire = encode_collection(gp, p4, pkt);

  CHECK_THROWS_AS(decode_collection(gp, p4, Bytes(wire.begin(), wire.end() - 1)), Error);
  Bytes longer = wire;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_collection(gp, p4, longer), Error);
  Bytes stray = wire;
  stray.back() |= 0x80; // side bit beyond the three siblings
  CHECK_THROWS_AS(decode_collection(gp, p4, stray), Error);
  Bytes big_scalar = wire;
  big_scalar[10] = 11; // O = q
  CHECK_THROWS_AS(decode_collection(gp, p4, big_scalar), Error);

  CollectionPacket bare = pkt;
  bare.proof.reset();
  CHECK_THROWS_AS(encode_collection(gp, p4, bare), Error);
}

TEST_CASE("broadcast packets")
{
  GroupParams gp = toy_group();
  BroadcastPacket bc{7, {1, 3}, Scalar(10)};
  ProtocolConfig with_list{Level::loss_resilient, Variant::list};
  Bytes expect{0, 0, 0, 0, 0, 0, 0, 7, 0, 2, 0, 1, 0, 3, 10};
  CHECK(encode_broadcast(gp, with_list, bc) == expect);
  CHECK(broadcast_size(gp, with_list, 2) == expect.size());
  CHECK(decode_broadcast(gp, with_list, expect) == bc);

  ProtocolConfig no_list{Level::merkle, Variant::no_list};
  Bytes bare = encode_broadcast(gp, no_list, bc);
  CHECK(bare == Bytes{0, 0, 0, 0, 0, 0, 0, 7, 10});
  CHECK(decode_broadcast(gp, no_list, bare).received.empty());

  ProtocolConfig simple{Level::simple, Variant::list};
  CHECK(broadcast_size(gp, simple, 5) == 9);

  Bytes unsorted{0, 0, 0, 0, 0, 0, 0, 7, 0, 2, 0, 3, 0, 1, 10};
  CHECK_THROWS_AS(decode_broadcast(gp, with_list, unsorted), Error);
  Bytes dup{0, 0, 0, 0, 0, 0, 0, 7, 0, 2, 0, 3, 0, 3, 10};
  CHECK_THROWS_AS(decode_broadcast(gp, with_list, dup), Error);
}

TEST_CASE("proof encoding round trips")
{
  Rng rng(5);
  for (std::size_t h = 0; h <= 20; ++h) {
    PositionProof p = random_proof(h, static_cast<std::uint32_t>(rng()), rng);
    Bytes wire = encode_proof(p);
    CHECK(wire.size() == 5 + 32 * h + (h + 7) / 8);
    CHECK(decode_proof(wire) == p);
  }
}
