#include "dcnet/key_schedule.hpp"

#include <cstring>
#include <string_view>

namespace dcnet {

namespace {

constexpr std::string_view pair_domain = "dcnet/pair";

Scalar sample_lane(const GroupParams& params, std::span<const std::uint8_t> key, const Bytes& prefix)
{
  const std::size_t nbytes = params.scalar_bytes();
  const std::size_t bits = params.order_bits();
  const mpz_class mask = (mpz_class(1) << bits) - 1;
  for (std::uint32_t attempt = 0;; ++attempt) {
    Bytes stream;
    for (std::uint32_t block = 0; stream.size() < nbytes; ++block) {
      Bytes msg = prefix;
      put_be(msg, attempt, 4);
      put_be(msg, block, 4);
      Digest d = hmac_sha256(key, msg);
      stream.insert(stream.end(), d.begin(), d.end());
    }
    stream.resize(nbytes);
    mpz_class x = from_bytes(stream) & mask;
    if (x < params.q) return Scalar(std::move(x));
  }
}

Bytes label(std::string_view text)
{
  return Bytes(text.begin(), text.end());
}

} // namespace

SecretPair derive_pair(const GroupParams& params, const Seed& seed, PlayerId player, Round round)
{
  if (round < 1)
    throw Error(Errc::out_of_range, "rounds are numbered from 1");
  Bytes prefix = label(pair_domain);
  put_be(prefix, player, 4);
  put_be(prefix, round, 8);
  Bytes k_prefix = prefix;
  k_prefix.push_back('k');
  Bytes r_prefix = prefix;
  r_prefix.push_back('r');
  return {sample_lane(params, seed, k_prefix), sample_lane(params, seed, r_prefix)};
}

std::vector<Scalar> dealer_setup_zero_sum(const GroupParams& params, std::size_t n,
                                          std::uint64_t rng_seed)
{
  Rng rng(rng_seed);
  return dealer_setup_zero_sum(params, n, [&] { return random_scalar(params, rng); });
}

SecretPair PlayerView::pair(const GroupParams& params, Round round) const
{
  if (round < 1)
    throw Error(Errc::out_of_range, "rounds are numbered from 1");
  if (round > rounds)
    throw Error(Errc::schedule_exhausted, "round " + std::to_string(round) + " beyond schedule of "
                                              + std::to_string(rounds));
  SecretPair p = derive_pair(params, seed, index, round);
  if (!fixed_k.empty()) p.k = fixed_k[round - 1];
  return p;
}

SecretPair CorrespondentView::pair(const GroupParams& params, PlayerId player, Round round) const
{
  if (player < 1 || player > seeds.size())
    throw Error(Errc::out_of_range, "unknown player " + std::to_string(player));
  if (round < 1 || round > rounds)
    throw Error(Errc::schedule_exhausted, "round " + std::to_string(round) + " outside schedule");
  SecretPair p = derive_pair(params, seeds[player - 1], player, round);
  if (!fixed_k.empty() && player == seeds.size()) p.k = fixed_k[round - 1];
  return p;
}

GroupParams SetupBundle::trapdoor_params() const
{
  GroupParams gp = public_params;
  gp.alpha = view_a.alpha.value;
  return gp;
}

Round padded_length(Round rounds)
{
  Round width = 1;
  while (width < rounds) width <<= 1;
  return width;
}

std::vector<Commitment> schedule_commitments(const GroupParams& params, const PlayerView& view,
                                             Round padded)
{
  std::vector<Commitment> out;
  out.reserve(padded);
  for (Round j = 1; j <= view.rounds; ++j) {
    SecretPair p = view.pair(params, j);
    out.push_back(commit(params, p.k, p.r));
  }
  out.resize(padded, commit(params, Scalar(0), Scalar(0)));
  return out;
}

SetupBundle dealer_setup_stream(const GroupParams& base, const StreamOptions& options)
{
  const std::size_t n = options.players;
  if (n < 2)
    throw Error(Errc::out_of_range, "a stream needs at least two players");
  if (options.level == Level::simple && n < 3)
    throw Error(Errc::out_of_range, "zero-sum setup needs at least 3 players");
  if (n > 0xffff)
    throw Error(Errc::out_of_range, "player index must fit 16 bits");
  if (options.rounds < 1)
    throw Error(Errc::out_of_range, "a stream needs at least one round");
  auto a = options.correspondent_a, b = options.correspondent_b;
  if (a < 1 || b < 1 || a > n || b > n || a == b)
    throw Error(Errc::out_of_range, "correspondents must be two distinct players");

  Bytes master_in = label("dcnet/dealer");
  put_be(master_in, options.rng_seed, 8);
  const Digest master = sha256(master_in);

  Scalar alpha;
  for (std::uint32_t attempt = 0; alpha.value == 0; ++attempt) {
    Bytes alpha_label = label("alpha");
    put_be(alpha_label, attempt, 4);
    alpha = sample_lane(base, master, alpha_label);
  }
  const GroupParams params = with_trapdoor(base, alpha);

  SetupBundle bundle;
  bundle.public_params = params.public_part();
  bundle.options = options;

  std::vector<Seed> seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    Bytes msg = label("seed");
    put_be(msg, i + 1, 4);
    seeds[i] = hmac_sha256(master, msg);
  }

  std::vector<Scalar> fixed_k;
  if (options.level == Level::simple) {
    fixed_k.reserve(options.rounds);
    for (Round j = 1; j <= options.rounds; ++j) {
      Scalar sum(0);
      for (std::size_t i = 0; i + 1 < n; ++i)
        sum = add(params, sum, derive_pair(params, seeds[i], static_cast<PlayerId>(i + 1), j).k);
      fixed_k.push_back(neg(params, sum));
    }
  }

  bundle.players.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& pv = bundle.players[i];
    pv.index = static_cast<PlayerId>(i + 1);
    pv.rounds = options.rounds;
    pv.seed = seeds[i];
    if (i + 1 == n) pv.fixed_k = fixed_k;
  }

  for (auto* view : {&bundle.view_a, &bundle.view_b}) {
    view->rounds = options.rounds;
    view->alpha = alpha;
    view->seeds = seeds;
    view->fixed_k = fixed_k;
  }
  bundle.view_a.index = a;
  bundle.view_a.peer = b;
  bundle.view_b.index = b;
  bundle.view_b.peer = a;

  auto& agg = bundle.aggregator;
  agg.level = options.level;
  agg.players = n;
  agg.rounds = options.rounds;
  agg.padded_rounds = padded_length(options.rounds);

  if (options.level == Level::verified) {
    agg.commitments.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      agg.commitments[i] = schedule_commitments(params, bundle.players[i], options.rounds);
  }
  else if (options.level == Level::merkle) {
    const Bytes filler = encode_element(params, commit(params, Scalar(0), Scalar(0)));
    agg.roots.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto cs = schedule_commitments(params, bundle.players[i], agg.padded_rounds);
      std::vector<Bytes> leaves;
      leaves.reserve(cs.size());
      for (const auto& c : cs) leaves.push_back(encode_element(params, c));
      auto tree = std::make_shared<const MerkleSchedule>(leaves, filler);
      agg.roots[i] = tree->root();
      bundle.players[i].tree = std::move(tree);
    }
  }
  return bundle;
}

} // namespace dcnet
