#include "dcnet/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "dcnet/error.hpp"
#include "dcnet/netsim.hpp"
#include "dcnet/protocol.hpp"

namespace dcnet {

PrivacyReport run_privacy_experiment(const PrivacyOptions& opt)
{
  if (opt.players < 3)
    throw Error(Errc::out_of_range, "privacy experiment needs at least 3 players");
  if (opt.corrupted + 3 > opt.players)
    throw Error(Errc::out_of_range, "at most n-3 players may be corrupted");
  if (opt.trials < 1)
    throw Error(Errc::out_of_range, "need at least one trial");

  const GroupParams base = resolve_group(opt.group);
  const ProtocolConfig config{Level::verified, Variant::list};
  std::vector<PlayerId> honest(opt.players - opt.corrupted);
  std::iota(honest.begin(), honest.end(), static_cast<PlayerId>(opt.corrupted + 1));

  PrivacyReport rep;
  rep.trials = opt.trials;
  rep.honest = honest.size();
  rep.pairs = rep.honest * (rep.honest - 1) / 2;
  rep.chance = 1.0 / static_cast<double>(rep.pairs);

  Rng rng(opt.seed);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    std::vector<PlayerId> pick;
    std::sample(honest.begin(), honest.end(), std::back_inserter(pick), 2, rng);
    StreamOptions so;
    so.players = opt.players;
    so.rounds = 1;
    so.level = Level::verified;
    so.correspondent_a = pick[0];
    so.correspondent_b = pick[1];
    so.rng_seed = rng();
    SetupBundle setup = dealer_setup_stream(base, so);
    const GroupParams trapdoor = setup.trapdoor_params();

    Aggregator agg(setup.public_params, config,
                   std::make_shared<const AggregatorView>(setup.aggregator));
    std::vector<PlayerId> everyone(opt.players);
    std::iota(everyone.begin(), everyone.end(), PlayerId{1});
    agg.open_round(1, everyone, 1.0);

    auto nonzero = [&] {
      Scalar m;
      do m = random_scalar(base, rng);
      while (m.value == 0);
      return m;
    };
    Correspondent a(trapdoor, config, setup.players[pick[0] - 1], setup.view_a,
                    Role::correspondent_a);
    Correspondent b(trapdoor, config, setup.players[pick[1] - 1], setup.view_b,
                    Role::correspondent_b);
    std::vector<CollectionPacket> seen;
    for (PlayerId id : everyone) {
      CollectionPacket pkt;
      if (id == pick[0]) pkt = a.emit(1, nonzero());
      else if (id == pick[1]) pkt = b.emit(1, nonzero());
      else pkt = Player(setup.public_params, config, setup.players[id - 1]).emit(1);
      if (agg.ingest(pkt, 0.0) != Verdict::accepted) ++rep.rejected;
      seen.push_back(std::move(pkt));
    }
    agg.finalize(1);

    std::vector<PlayerId> guess;
    if (opt.knowledge == AdversaryKnowledge::keys) {
      for (PlayerId id : honest) {
        SecretPair pair = setup.players[id - 1].pair(setup.public_params, 1);
        if (!(seen[id - 1].opening == pair.k)) guess.push_back(id);
      }
    }
    else {
      // Openings are uniform whoever sends them; rank by value, lowest id on ties.
      guess = honest;
      std::stable_sort(guess.begin(), guess.end(), [&](PlayerId x, PlayerId y) {
        return seen[x - 1].opening.value > seen[y - 1].opening.value;
      });
      guess.resize(2);
    }
    std::sort(guess.begin(), guess.end());
    std::sort(pick.begin(), pick.end());
    if (guess == pick) ++rep.correct;
  }

  const double n = static_cast<double>(rep.trials);
  rep.accuracy = static_cast<double>(rep.correct) / n;
  rep.sigma = std::sqrt(rep.chance * (1 - rep.chance) / n);
  rep.z = rep.sigma > 0 ? (rep.accuracy - rep.chance) / rep.sigma : 0;
  return rep;
}

HomogeneityTest opening_homogeneity(const GroupParams& base, const Scalar& message,
                                    std::size_t trials, std::uint64_t seed)
{
  if (base.q > 1024)
    throw Error(Errc::out_of_range, "homogeneity test tabulates every (O, s) pair; use a small group");
  const auto q = base.q.get_ui();
  std::vector<double> bystander(q * q, 0), speaker(q * q, 0);
  Rng rng(seed);
  StreamOptions so;
  so.players = 3;
  so.rounds = 1;
  so.level = Level::verified;
  const ProtocolConfig config{Level::verified, Variant::list};
  for (std::size_t t = 0; t < trials; ++t) {
    so.rng_seed = rng();
    SetupBundle setup = dealer_setup_stream(base, so);
    Player by(setup.public_params, config, setup.players[2]);
    Correspondent co(setup.trapdoor_params(), config, setup.players[0], setup.view_a,
                     Role::correspondent_a);
    auto cell = [q](const CollectionPacket& p) {
      return p.opening.value.get_ui() * q + p.blinding->value.get_ui();
    };
    bystander[cell(by.emit(1))] += 1;
    speaker[cell(co.emit(1, message))] += 1;
  }

  HomogeneityTest out;
  out.trials = trials;
  std::size_t used = 0;
  const double total = 2.0 * static_cast<double>(trials);
  for (std::size_t c = 0; c < q * q; ++c) {
    const double col = bystander[c] + speaker[c];
    if (col == 0) continue;
    ++used;
    const double expect = col * static_cast<double>(trials) / total;
    out.statistic += (bystander[c] - expect) * (bystander[c] - expect) / expect;
    out.statistic += (speaker[c] - expect) * (speaker[c] - expect) / expect;
  }
  out.dof = static_cast<double>(used) - 1;
  if (out.dof < 1) {
    out.p_value = 1.0;
    return out;
  }
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

} // namespace dcnet
