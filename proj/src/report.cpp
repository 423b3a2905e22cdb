#include "dcnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dcnet/error.hpp"

namespace dcnet {

namespace {

using nlohmann::ordered_json;

template <typename E, std::size_t N>
E parse_enum(const std::string& text, const std::array<E, N>& all)
{
  for (E e : all)
    if (text == to_string(e)) return e;
  throw Error(Errc::decode_error, "unknown value '" + text + "' in trace");
}

constexpr std::array all_deliveries{Delivery::not_sent, Delivery::delivered, Delivery::lost,
                                    Delivery::late};
constexpr std::array all_outcomes{Outcome::ok, Outcome::garbled, Outcome::peer_absent,
                                  Outcome::broadcast_lost, Outcome::undecodable};
constexpr std::array all_verdicts{Verdict::accepted,         Verdict::bad_opening,
                                  Verdict::bad_proof,        Verdict::missing_field,
                                  Verdict::duplicate_sender, Verdict::wrong_round,
                                  Verdict::late_arrival,     Verdict::unknown_sender,
                                  Verdict::banned};

std::string hex_scalar(const Scalar& s) { return s.value.get_str(16); }

} // namespace

std::vector<NodeTraffic> traffic_from_traces(const std::vector<RoundTrace>& rounds,
                                             std::size_t players)
{
  std::vector<NodeTraffic> t(players + 1);
  for (const auto& r : rounds) {
    for (const auto& p : r.packets) {
      if (p.delivery == Delivery::not_sent) continue;
      t[p.player].packets_out += 1;
      t[p.player].bytes_out += p.bytes;
      if (p.delivery == Delivery::delivered || p.delivery == Delivery::late) {
        t[r.aggregator].packets_in += 1;
        t[r.aggregator].bytes_in += p.bytes;
      }
    }
    if (r.counters.broadcasts_sent == 0) continue;
    const std::uint64_t size = r.counters.broadcast_bytes / r.counters.broadcasts_sent;
    t[r.aggregator].packets_out += r.counters.broadcasts_sent;
    t[r.aggregator].bytes_out += r.counters.broadcast_bytes;
    for (PlayerId id = 1; id <= players; ++id) {
      if (id == r.aggregator) continue;
      if (std::find(r.broadcast_missed.begin(), r.broadcast_missed.end(), id)
          != r.broadcast_missed.end())
        continue;
      t[id].packets_in += 1;
      t[id].bytes_in += size;
    }
  }
  return t;
}

RunReport summarize(const SimConfig& cfg, const std::vector<RoundTrace>& rounds)
{
  RunReport rep;
  rep.scenario = cfg.id;
  rep.rounds = rounds.size();
  rep.players = cfg.players;

  double latency_sum = 0, last_sum = 0;
  std::uint64_t latency_count = 0;
  std::set<PlayerId> flagged;
  for (const auto& r : rounds) {
    bool lossfree = true, complete = true, adversary_in = false, clean = true;
    double last = 0;
    for (const auto& p : r.packets) {
      if (p.delivery == Delivery::not_sent) continue;
      ++rep.packets_sent;
      switch (p.delivery) {
      case Delivery::delivered: ++rep.packets_delivered; break;
      case Delivery::lost: ++rep.packets_lost; break;
      case Delivery::late: ++rep.packets_late; break;
      case Delivery::not_sent: break;
      }
      if (p.delivery == Delivery::lost || p.delivery == Delivery::late) lossfree = false;
      if (p.delivery == Delivery::lost) complete = false;
      else {
        const double lat = p.arrived_at - p.sent_at;
        latency_sum += lat;
        ++latency_count;
        last = std::max(last, lat);
      }
      if (p.verdict && *p.verdict != Verdict::accepted) ++rep.rejections[to_string(*p.verdict)];
      if (p.adversarial && p.verdict == Verdict::accepted) adversary_in = true;
      if (p.adversarial || p.verdict != Verdict::accepted) clean = false;
    }
    if (lossfree) ++rep.lossfree_rounds;
    if (complete) {
      ++rep.complete_rounds;
      last_sum += last;
    }

    auto accepted = [&](PlayerId id) {
      const PacketRecord* p = r.packet_of(id);
      return p && p->verdict == Verdict::accepted;
    };
    const bool both = accepted(cfg.correspondent_a) && accepted(cfg.correspondent_b);
    bool garbled = false;
    for (const auto& rec : r.recoveries) {
      ++rep.outcomes[static_cast<std::size_t>(rec.outcome)];
      if (rec.outcome == Outcome::garbled) garbled = true;
      if (both && rec.outcome != Outcome::broadcast_lost) {
        ++rep.checked;
        if (rec.outcome != Outcome::ok) ++rep.mismatches;
      }
    }
    if (clean && both) {
      ++rep.clean_rounds;
      for (const auto& rec : r.recoveries)
        if (rec.outcome == Outcome::garbled || rec.outcome == Outcome::peer_absent)
          ++rep.clean_mismatches;
    }
    if (adversary_in) {
      ++rep.affected_rounds;
      if (garbled) ++rep.affected_garbled;
    }
    flagged.insert(r.flagged.begin(), r.flagged.end());
  }
  rep.flagged.assign(flagged.begin(), flagged.end());

  const double R = static_cast<double>(std::max<std::size_t>(rounds.size(), 1));
  rep.mean_senders = static_cast<double>(rep.packets_sent) / R;
  rep.lossfree_ratio = static_cast<double>(rep.lossfree_rounds) / R;
  rep.mean_latency_ms = latency_count ? latency_sum / static_cast<double>(latency_count) : 0;
  rep.mean_last_arrival_ms =
      rep.complete_rounds ? last_sum / static_cast<double>(rep.complete_rounds) : 0;

  const double m = rep.mean_senders;
  switch (cfg.uplink_loss.kind) {
  case LossSpec::Kind::none: rep.model_lossfree_ratio = 1.0; break;
  case LossSpec::Kind::bernoulli: rep.model_lossfree_ratio = std::pow(1 - cfg.uplink_loss.p, m); break;
  case LossSpec::Kind::gilbert_elliott:
    rep.model_lossfree_ratio = std::pow(1 - gilbert_elliott_stationary_loss(cfg.uplink_loss.ge), m);
    break;
  }
  const auto n_senders = static_cast<std::size_t>(std::llround(m));
  if (cfg.latency.kind == LatencySpec::Kind::lognormal && n_senders >= 1)
    rep.model_last_arrival_ms = expected_max_latency_ms(
        {cfg.latency.u, cfg.latency.s, cfg.latency.unit_ms}, n_senders);

  const auto traffic = traffic_from_traces(rounds, cfg.players);
  const double secs = R / cfg.rate_hz;
  auto rate = [&](const NodeTraffic& t, double share) {
    return NodeRate{t.packets_out / secs / share, t.packets_in / secs / share,
                    8.0 * t.bytes_out / secs / share, 8.0 * t.bytes_in / secs / share};
  };
  NodeTraffic players_sum;
  for (std::size_t i = 1; i <= cfg.players; ++i) {
    players_sum.packets_out += traffic[i].packets_out;
    players_sum.packets_in += traffic[i].packets_in;
    players_sum.bytes_out += traffic[i].bytes_out;
    players_sum.bytes_in += traffic[i].bytes_in;
  }
  const double n = static_cast<double>(cfg.players);
  rep.aggregator = rate(traffic[0], 1.0);
  rep.mean_player = rate(players_sum, n);
  rep.formula_per_player = (n - 1) / n * 2.0 / cfg.rate_hz;
  rep.rate_per_player = (n - 1) / n * 2.0 * cfg.rate_hz;
  return rep;
}

std::string report_csv(const RunReport& r)
{
  std::ostringstream out;
  out.precision(10);
  auto row = [&](const std::string& k, auto v) { out << k << ',' << v << '\n'; };
  out << "metric,value\n";
  row("scenario", r.scenario);
  row("rounds", r.rounds);
  row("players", r.players);
  row("mean_senders", r.mean_senders);
  row("packets_sent", r.packets_sent);
  row("packets_delivered", r.packets_delivered);
  row("packets_lost", r.packets_lost);
  row("packets_late", r.packets_late);
  row("lossfree_rounds", r.lossfree_rounds);
  row("lossfree_ratio", r.lossfree_ratio);
  row("model_lossfree_ratio", r.model_lossfree_ratio);
  row("lossfree_delta", r.lossfree_ratio - r.model_lossfree_ratio);
  for (Outcome o : all_outcomes)
    row(std::string("recover_") + to_string(o), r.outcomes[static_cast<std::size_t>(o)]);
  row("checked_recoveries", r.checked);
  row("recovery_mismatches", r.mismatches);
  row("clean_rounds", r.clean_rounds);
  row("clean_mismatches", r.clean_mismatches);
  row("affected_rounds", r.affected_rounds);
  row("affected_garbled", r.affected_garbled);
  for (Verdict v : all_verdicts) {
    if (v == Verdict::accepted) continue;
    auto it = r.rejections.find(to_string(v));
    row(std::string("reject_") + to_string(v), it == r.rejections.end() ? 0 : it->second);
  }
  std::string flagged;
  for (PlayerId id : r.flagged) flagged += (flagged.empty() ? "" : " ") + std::to_string(id);
  row("audit_flagged", flagged);
  row("mean_latency_ms", r.mean_latency_ms);
  row("complete_rounds", r.complete_rounds);
  row("mean_last_arrival_ms", r.mean_last_arrival_ms);
  row("model_last_arrival_ms", r.model_last_arrival_ms);
  row("last_arrival_delta_ms", r.mean_last_arrival_ms - r.model_last_arrival_ms);
  row("aggregator_pps_out", r.aggregator.packets_out);
  row("aggregator_pps_in", r.aggregator.packets_in);
  row("aggregator_bps_out", r.aggregator.bits_out);
  row("aggregator_bps_in", r.aggregator.bits_in);
  row("player_pps_out", r.mean_player.packets_out);
  row("player_pps_in", r.mean_player.packets_in);
  row("player_bps_out", r.mean_player.bits_out);
  row("player_bps_in", r.mean_player.bits_in);
  row("formula_per_player", r.formula_per_player);
  row("rate_per_player", r.rate_per_player);
  return out.str();
}

std::string rounds_jsonl(const std::vector<RoundTrace>& rounds)
{
  std::string out;
  for (const auto& r : rounds) {
    ordered_json j;
    j["round"] = r.round;
    j["aggregator"] = r.aggregator;
    j["start_ms"] = r.start_ms;
    j["deadline_ms"] = r.deadline_ms;
    j["packets"] = ordered_json::array();
    for (const auto& p : r.packets) {
      ordered_json pj;
      pj["player"] = p.player;
      pj["adversarial"] = p.adversarial;
      pj["delivery"] = to_string(p.delivery);
      pj["sent_at"] = p.sent_at;
      pj["arrived_at"] = p.arrived_at;
      pj["verdict"] = p.verdict ? ordered_json(to_string(*p.verdict)) : ordered_json(nullptr);
      pj["bytes"] = p.bytes;
      j["packets"].push_back(std::move(pj));
    }
    j["received"] = r.received;
    j["sum"] = hex_scalar(r.sum);
    j["recoveries"] = ordered_json::array();
    for (const auto& rec : r.recoveries)
      j["recoveries"].push_back(
          {{"correspondent", rec.correspondent}, {"outcome", to_string(rec.outcome)}, {"at", rec.at}});
    const auto& c = r.counters;
    j["counters"] = {{"packets_sent", c.packets_sent},
                     {"packets_delivered", c.packets_delivered},
                     {"packets_lost", c.packets_lost},
                     {"packets_late", c.packets_late},
                     {"bytes_sent", c.bytes_sent},
                     {"broadcasts_sent", c.broadcasts_sent},
                     {"broadcasts_delivered", c.broadcasts_delivered},
                     {"broadcasts_lost", c.broadcasts_lost},
                     {"broadcast_bytes", c.broadcast_bytes}};
    j["broadcast_missed"] = r.broadcast_missed;
    j["flagged"] = r.flagged;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RoundTrace> parse_rounds_jsonl(const std::string& text)
{
  std::vector<RoundTrace> out;
  std::istringstream in(text);
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = ordered_json::parse(line);
      RoundTrace r;
      r.round = j.at("round").get<Round>();
      r.aggregator = j.at("aggregator").get<PlayerId>();
      r.start_ms = j.at("start_ms").get<double>();
      r.deadline_ms = j.at("deadline_ms").get<double>();
      for (const auto& pj : j.at("packets")) {
        PacketRecord p;
        p.player = pj.at("player").get<PlayerId>();
        p.adversarial = pj.at("adversarial").get<bool>();
        p.delivery = parse_enum(pj.at("delivery").get<std::string>(), all_deliveries);
        p.sent_at = pj.at("sent_at").get<double>();
        p.arrived_at = pj.at("arrived_at").get<double>();
        if (!pj.at("verdict").is_null())
          p.verdict = parse_enum(pj.at("verdict").get<std::string>(), all_verdicts);
        p.bytes = pj.at("bytes").get<std::size_t>();
        r.packets.push_back(p);
      }
      r.received = j.at("received").get<std::vector<PlayerId>>();
      r.sum = Scalar(mpz_class(j.at("sum").get<std::string>(), 16));
      for (const auto& rj : j.at("recoveries"))
        r.recoveries.push_back({rj.at("correspondent").get<PlayerId>(),
                                parse_enum(rj.at("outcome").get<std::string>(), all_outcomes),
                                rj.at("at").get<double>()});
      const auto& c = j.at("counters");
      r.counters = {c.at("packets_sent").get<std::uint64_t>(),
                    c.at("packets_delivered").get<std::uint64_t>(),
                    c.at("packets_lost").get<std::uint64_t>(),
                    c.at("packets_late").get<std::uint64_t>(),
                    c.at("bytes_sent").get<std::uint64_t>(),
                    c.at("broadcasts_sent").get<std::uint64_t>(),
                    c.at("broadcasts_delivered").get<std::uint64_t>(),
                    c.at("broadcasts_lost").get<std::uint64_t>(),
                    c.at("broadcast_bytes").get<std::uint64_t>()};
      r.broadcast_missed = j.at("broadcast_missed").get<std::vector<PlayerId>>();
      r.flagged = j.at("flagged").get<std::vector<PlayerId>>();
      out.push_back(std::move(r));
    }
  }
  catch (const nlohmann::json::exception& e) {
    throw Error(Errc::decode_error, std::string("bad rounds trace: ") + e.what());
  }
  return out;
}

} // namespace dcnet
