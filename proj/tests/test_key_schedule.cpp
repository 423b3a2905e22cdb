#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "dcnet/hash.hpp"
#include "dcnet/key_schedule.hpp"

using namespace dcnet;

namespace {

Seed seed_of(std::uint8_t fill)
{
  Seed s;
  s.fill(fill);
  return s;
}

double chi_square_uniform_p(const std::vector<double>& counts)
{
  double total = 0;
  for (double c : counts) total += c;
  const double expect = total / static_cast<double>(counts.size());
  double stat = 0;
  for (double c : counts) stat += (c - expect) * (c - expect) / expect;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

} // namespace

TEST_CASE("hash primitives match published vectors")
{
  const std::string msg = "The quick brown fox jumps over the lazy dog";
  const std::string key = "key";
  Digest mac = hmac_sha256(Bytes(key.begin(), key.end()), Bytes(msg.begin(), msg.end()));
  CHECK(to_hex(mac) == "f7bc83f430538424b13298e6aa6fb143ef4d59a14946175997479dbc2d1a3cd8");
  CHECK(to_hex(sha256(Bytes{}))
        == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(from_hex("00ff10") == Bytes{0x00, 0xff, 0x10});
}

TEST_CASE("derive_pair is deterministic and round-separated")
{
  GroupParams gp = with_trapdoor(base_group_256(), Scalar(99));
  Seed seed = seed_of(0x42);
  CHECK(derive_pair(gp, seed, 3, 7) == derive_pair(gp, seed, 3, 7));
  for (Round j = 1; j <= 10000; ++j) {
    SecretPair a = derive_pair(gp, seed, 1, j);
    SecretPair b = derive_pair(gp, seed, 1, j + 1);
    REQUIRE_FALSE(a.k == b.k);
    REQUIRE_FALSE(a.r == b.r);
    REQUIRE_FALSE(a.k == a.r);
  }
  CHECK_FALSE(derive_pair(gp, seed, 1, 1) == derive_pair(gp, seed, 2, 1));
  CHECK_FALSE(derive_pair(gp, seed, 1, 1) == derive_pair(gp, seed_of(0x43), 1, 1));
  CHECK_THROWS_AS(derive_pair(gp, seed, 1, 0), Error);
}

TEST_CASE("derived k values are uniform over the toy order")
{
  // One seed alone fails at the 1% level now and then; require most to pass.
  GroupParams gp = toy_group();
  int low = 0;
  for (std::uint8_t fill = 1; fill <= 10; ++fill) {
    std::vector<double> counts(11, 0.0);
    Seed seed = seed_of(fill);
    for (Round j = 1; j <= 100000; ++j) counts[derive_pair(gp, seed, 1, j).k.value.get_ui()] += 1;
    low += chi_square_uniform_p(counts) < 0.01;
  }
  CHECK(low <= 2);
}

TEST_CASE("zero-sum dealer")
{
  GroupParams gp = toy_group();
  std::vector<long> draws{3, 5};
  std::size_t next = 0;
  auto keys = dealer_setup_zero_sum(gp, 3, [&] { return Scalar(draws[next++]); });
  REQUIRE(keys.size() == 3);
  CHECK(keys[0] == Scalar(3));
  CHECK(keys[1] == Scalar(5));
  CHECK(keys[2] == Scalar(3));

  auto zeros = dealer_setup_zero_sum(gp, 3, [] { return Scalar(0); });
  for (const auto& k : zeros) CHECK(k == Scalar(0));

  CHECK_THROWS_AS(dealer_setup_zero_sum(gp, 2, std::uint64_t{1}), Error);
  try {
    dealer_setup_zero_sum(gp, 12, std::uint64_t{1});
    FAIL("expected GroupTooSmall");
  }
  catch (const Error& e) {
    CHECK(e.code() == Errc::group_too_small);
  }

  GroupParams big = with_trapdoor(base_group_256(), Scalar(5));
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    auto ks = dealer_setup_zero_sum(big, 3 + seed % 8, seed);
    Scalar sum(0);
    for (const auto& k : ks) sum = add(big, sum, k);
    REQUIRE(sum == Scalar(0));
  }
}

TEST_CASE("stream setup: level 1 keys sum to zero every round")
{
  StreamOptions opt;
  opt.players = 6;
  opt.rounds = 50;
  opt.level = Level::simple;
  SetupBundle b = dealer_setup_stream(toy_group().public_part(), opt);
  for (Round j = 1; j <= opt.rounds; ++j) {
    Scalar sum(0);
    for (const auto& pv : b.players) sum = add(b.public_params, sum, pv.pair(b.public_params, j).k);
    CHECK(sum == Scalar(0));
  }
}

TEST_CASE("stream setup: views agree and the aggregator holds no scalars")
{
  StreamOptions opt;
  opt.players = 4;
  opt.rounds = 5;
  opt.level = Level::merkle;
  opt.correspondent_a = 2;
  opt.correspondent_b = 4;
  SetupBundle b = dealer_setup_stream(base_group_256(), opt);
  const GroupParams td = b.trapdoor_params();
  CHECK_FALSE(b.public_params.alpha);
  CHECK_NOTHROW(validate(td));
  CHECK(b.view_a.index == 2);
  CHECK(b.view_a.peer == 4);
  CHECK(b.view_b.index == 4);
  CHECK(b.aggregator.padded_rounds == 8);
  CHECK(b.aggregator.roots.size() == 4);
  CHECK(b.aggregator.commitments.empty());

  for (PlayerId i = 1; i <= 4; ++i)
    for (Round j = 1; j <= 5; ++j) {
      SecretPair expect = derive_pair(td, b.players[i - 1].seed, i, j);
      CHECK(b.view_a.pair(td, i, j) == expect);
      CHECK(b.view_b.pair(td, i, j) == expect);
      CHECK(b.players[i - 1].pair(td, j) == expect);
    }

  // Leaf j of each tree is the commitment of round j; padding is commit(0, 0).
  for (PlayerId i = 1; i <= 4; ++i) {
    auto cs = schedule_commitments(td, b.players[i - 1], 8);
    REQUIRE(cs.size() == 8);
    for (Round j = 1; j <= 5; ++j) {
      SecretPair p = derive_pair(td, b.players[i - 1].seed, i, j);
      CHECK(cs[j - 1] == commit(td, p.k, p.r));
      auto proof = b.players[i - 1].tree->prove(static_cast<std::uint32_t>(j));
      CHECK(verify_position(b.aggregator.roots[i - 1], encode_element(td, cs[j - 1]),
                            static_cast<std::uint32_t>(j), proof));
    }
    for (Round j = 6; j <= 8; ++j) CHECK(cs[j - 1].value == 1);
  }

  CHECK_THROWS_AS(b.players[0].pair(td, 6), Error);
}

TEST_CASE("stream setup: one-round tree root is the leaf hash")
{
  StreamOptions opt;
  opt.players = 3;
  opt.rounds = 1;
  SetupBundle b = dealer_setup_stream(toy_group().public_part(), opt);
  const GroupParams td = b.trapdoor_params();
  for (PlayerId i = 1; i <= 3; ++i) {
    SecretPair p = b.players[i - 1].pair(td, 1);
    CHECK(b.aggregator.roots[i - 1] == hash_leaf(encode_element(td, commit(td, p.k, p.r))));
  }
}

TEST_CASE("stream setup is a pure function of its inputs")
{
  StreamOptions opt;
  opt.players = 5;
  opt.rounds = 9;
  opt.level = Level::verified;
  opt.rng_seed = 77;
  SetupBundle a = dealer_setup_stream(toy_group().public_part(), opt);
  SetupBundle b = dealer_setup_stream(toy_group().public_part(), opt);
  CHECK(a.public_params.h == b.public_params.h);
  CHECK(a.aggregator.commitments == b.aggregator.commitments);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.players[i].seed == b.players[i].seed);
  CHECK(a.aggregator.commitments.size() == 5);
  CHECK(a.aggregator.commitments[0].size() == 9);
  opt.rng_seed = 78;
  SetupBundle c = dealer_setup_stream(toy_group().public_part(), opt);
  CHECK_FALSE(a.players[0].seed == c.players[0].seed);
}

TEST_CASE("stream setup rejects bad options")
{
  GroupParams gp = toy_group().public_part();
  StreamOptions opt;
  opt.players = 1;
  CHECK_THROWS_AS(dealer_setup_stream(gp, opt), Error);
  opt.players = 2;
  opt.level = Level::simple;
  CHECK_THROWS_AS(dealer_setup_stream(gp, opt), Error);
  opt.level = Level::merkle;
  opt.correspondent_b = 1;
  CHECK_THROWS_AS(dealer_setup_stream(gp, opt), Error);
  opt.correspondent_b = 3;
  CHECK_THROWS_AS(dealer_setup_stream(gp, opt), Error);
  opt.correspondent_b = 2;
  opt.rounds = 0;
  CHECK_THROWS_AS(dealer_setup_stream(gp, opt), Error);
}
