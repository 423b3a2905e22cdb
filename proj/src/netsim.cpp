#include "dcnet/netsim.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <tuple>

#include <json.hpp>

#include "dcnet/error.hpp"
#include "dcnet/framing.hpp"
#include "dcnet/wire.hpp"

namespace dcnet {

// ---------------------------------------------------------------------------
// Channel models

ChannelStep gilbert_elliott_step(ChannelState state, const GilbertElliottParams& params, Rng& rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ChannelStep out;
  const double err = state == ChannelState::good ? params.loss_good : params.loss_bad;
  out.lost = unit(rng) < err;
  const double leave = state == ChannelState::good ? params.p_good_to_bad : params.p_bad_to_good;
  const bool flip = unit(rng) < leave;
  out.next = flip ? (state == ChannelState::good ? ChannelState::bad : ChannelState::good) : state;
  return out;
}

double gilbert_elliott_stationary_loss(const GilbertElliottParams& params)
{
  const double total = params.p_good_to_bad + params.p_bad_to_good;
  if (total <= 0) return params.loss_good; // chain never leaves its start state
  return (params.p_good_to_bad * params.loss_bad + params.p_bad_to_good * params.loss_good) / total;
}

bool LossChannel::drop(Rng& rng)
{
  switch (m_spec.kind) {
  case LossSpec::Kind::none: return false;
  case LossSpec::Kind::bernoulli: {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < m_spec.p;
  }
  case LossSpec::Kind::gilbert_elliott: {
    auto step = gilbert_elliott_step(m_state, m_spec.ge, rng);
    m_state = step.next;
    return step.lost;
  }
  }
  return false;
}

double LatencySpec::sample_ms(Rng& rng) const
{
  if (kind == Kind::fixed) return fixed_ms;
  std::lognormal_distribution<double> dist(u, s);
  return dist(rng) * unit_ms;
}

// ---------------------------------------------------------------------------
// Scenario

const char* to_string(AdversaryStrategy s) noexcept
{
  switch (s) {
  case AdversaryStrategy::random_opening: return "random_opening";
  case AdversaryStrategy::replayed_opening: return "replayed_opening";
  case AdversaryStrategy::wrong_round_proof: return "wrong_round_proof";
  case AdversaryStrategy::drop_silently: return "drop_silently";
  }
  return "unknown";
}

AdversaryStrategy parse_strategy(const std::string& text)
{
  for (auto s : {AdversaryStrategy::random_opening, AdversaryStrategy::replayed_opening,
                 AdversaryStrategy::wrong_round_proof, AdversaryStrategy::drop_silently})
    if (text == to_string(s)) return s;
  throw Error(Errc::config_mismatch, "unknown adversary strategy '" + text + "'");
}

PlayerId rotate_aggregator(Round round, std::size_t players)
{
  if (round < 1 || players < 1)
    throw Error(Errc::out_of_range, "rotation needs round >= 1 and at least one player");
  return static_cast<PlayerId>((round - 1) % players + 1);
}

void SimConfig::validate() const
{
  auto fail = [](const std::string& msg) { throw Error(Errc::config_mismatch, msg); };
  auto prob = [&](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(what) + " must lie in [0, 1]");
  };
  if (players < 2) fail("need at least two players");
  if (players > 0xffff) fail("player ids are 16-bit");
  if (protocol.level == Level::simple && players < 3) fail("level 1 needs at least three players");
  if (protocol.level == Level::simple && protocol.variant != Variant::list)
    fail("level 1 has no list-free or optimistic variant");
  if (protocol.variant == Variant::optimistic && protocol.level == Level::simple)
    fail("optimistic audits need per-player keys");
  if (rounds < 1) fail("need at least one round");
  if (!(rate_hz > 0)) fail("rate must be positive");
  if (!(deadline_ms > 0)) fail("deadline must be positive");
  if (latency.kind == LatencySpec::Kind::lognormal && !(latency.s > 0)) fail("log-normal s must be > 0");
  if (latency.kind == LatencySpec::Kind::lognormal && !(latency.unit_ms > 0)) fail("unit must be > 0");
  if (latency.kind == LatencySpec::Kind::fixed && latency.fixed_ms < 0) fail("latency must be >= 0");
  prob(uplink_loss.p, "loss p");
  prob(uplink_loss.ge.p_good_to_bad, "P_gb");
  prob(uplink_loss.ge.p_bad_to_good, "P_bg");
  prob(uplink_loss.ge.loss_good, "e_good");
  prob(uplink_loss.ge.loss_bad, "e_bad");
  prob(speak_probability, "speak probability");
  if (correspondent_a < 1 || correspondent_b < 1 || correspondent_a > players
      || correspondent_b > players || correspondent_a == correspondent_b)
    fail("correspondents must be two distinct players");
  if (max_missing > 3) fail("list-free search bound is at most 3");
  std::set<PlayerId> seen;
  for (const auto& adv : adversaries) {
    if (adv.player < 1 || adv.player > players) fail("adversary outside player range");
    if (adv.player == correspondent_a || adv.player == correspondent_b)
      fail("adversaries must be bystanders");
    if (!seen.insert(adv.player).second) fail("player listed twice as adversary");
  }
}

GroupParams resolve_group(const std::string& spec)
{
  if (spec == "toy") return toy_group().public_part();
  if (spec == "p256") return base_group_256();
  if (spec.rfind("generate:", 0) == 0) {
    unsigned bits = static_cast<unsigned>(std::stoul(spec.substr(9)));
    return generate_schnorr_group(bits, 1);
  }
  return read_group_file(spec).public_part();
}

SetupBundle make_setup(const SimConfig& cfg)
{
  cfg.validate();
  StreamOptions opt;
  opt.players = cfg.players;
  opt.rounds = cfg.rounds;
  opt.level = cfg.protocol.level;
  opt.correspondent_a = cfg.correspondent_a;
  opt.correspondent_b = cfg.correspondent_b;
  opt.rng_seed = cfg.seed;
  return dealer_setup_stream(resolve_group(cfg.group), opt);
}

// ---------------------------------------------------------------------------
// Traces

const char* to_string(Delivery d) noexcept
{
  switch (d) {
  case Delivery::not_sent: return "not_sent";
  case Delivery::delivered: return "delivered";
  case Delivery::lost: return "lost";
  case Delivery::late: return "late";
  }
  return "unknown";
}

const char* to_string(Outcome o) noexcept
{
  switch (o) {
  case Outcome::ok: return "ok";
  case Outcome::garbled: return "garbled";
  case Outcome::peer_absent: return "peer_absent";
  case Outcome::broadcast_lost: return "broadcast_lost";
  case Outcome::undecodable: return "undecodable";
  }
  return "unknown";
}

const PacketRecord* RoundTrace::packet_of(PlayerId player) const
{
  for (const auto& p : packets)
    if (p.player == player) return &p;
  return nullptr;
}

const RecoveryRecord* RoundTrace::recovery_of(PlayerId player) const
{
  for (const auto& r : recoveries)
    if (r.correspondent == player) return &r;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Event loop

namespace {

enum class Stream : std::uint32_t { uplink = 1, downlink = 2, adversary = 3, message = 4 };

Rng make_stream(std::uint64_t seed, Stream kind, std::uint32_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind), index};
  return Rng(seq);
}

// Arrivals at the deadline instant still count; finalize runs after them.
enum Priority : int { round_start = 0, arrival = 1, finalize = 2, audit = 3 };

struct Queued {
  double time;
  int priority;
  std::uint64_t seq;
  std::function<void()> action;
};

struct Later {
  bool operator()(const Queued& a, const Queued& b) const
  {
    return std::tie(a.time, a.priority, a.seq) > std::tie(b.time, b.priority, b.seq);
  }
};

class Simulation {
public:
  Simulation(const SimConfig& cfg, const SetupBundle& setup);
  SimResult run();

private:
  void schedule(double time, int priority, std::function<void()> action)
  {
    m_queue.push({time, priority, m_seq++, std::move(action)});
  }
  void note(double time, const char* kind, Round round, int from, int to, std::string detail = {})
  {
    if (m_cfg.record_events)
      m_result.events.push_back({time, kind, round, from, to, std::move(detail)});
  }

  PlayerId aggregator_of(Round round) const
  {
    return m_cfg.rotation == Rotation::round_robin ? rotate_aggregator(round, m_cfg.players) : 0;
  }
  std::vector<PlayerId> senders_of(Round round) const;
  Aggregator& aggregator_node(PlayerId node);
  Correspondent* correspondent(PlayerId id) const;
  std::optional<Scalar> draw_message();
  std::optional<CollectionPacket> adversarial_packet(PlayerId id, AdversaryStrategy s, Round j);

  void start_round(Round j);
  void arrive(Round j, PlayerId sender, const CollectionPacket& pkt, double time);
  void finalize_round(Round j);
  void recover(Round j, PlayerId who, const BroadcastPacket& bc, double time);
  void run_audit(Round j, PlayerId who, double time);

  const SimConfig& m_cfg;
  const SetupBundle& m_setup;
  GroupParams m_public;
  GroupParams m_trapdoor;
  bool m_framed = false;
  std::size_t m_tree_height = 0;

  std::vector<std::unique_ptr<Player>> m_players; // [id], [0] unused
  Correspondent* m_a = nullptr;
  Correspondent* m_b = nullptr;
  std::map<PlayerId, AdversaryStrategy> m_adversaries;
  std::shared_ptr<const AggregatorView> m_agg_view;
  std::vector<std::unique_ptr<Aggregator>> m_aggregators; // [node]

  std::vector<LossChannel> m_up, m_down;
  std::vector<Rng> m_up_rng, m_down_rng, m_adv_rng;
  Rng m_msg_rng;

  std::priority_queue<Queued, std::vector<Queued>, Later> m_queue;
  std::uint64_t m_seq = 0;
  std::set<Round> m_audited;
  SimResult m_result;
};

Simulation::Simulation(const SimConfig& cfg, const SetupBundle& setup)
  : m_cfg(cfg)
  , m_setup(setup)
  , m_public(setup.public_params)
  , m_trapdoor(setup.trapdoor_params())
  , m_msg_rng(make_stream(cfg.seed, Stream::message, 0))
{
  cfg.validate();
  const auto& opt = setup.options;
  if (opt.players != cfg.players || opt.rounds != cfg.rounds || opt.level != cfg.protocol.level
      || opt.correspondent_a != cfg.correspondent_a || opt.correspondent_b != cfg.correspondent_b)
    throw Error(Errc::config_mismatch, "setup bundle does not match the scenario");

  m_framed = frame_capacity(m_public) >= cfg.payload_bytes;
  if (cfg.protocol.variant != Variant::list && !m_framed)
    throw Error(Errc::config_mismatch,
                "list-free and optimistic variants need framed payloads; group too small for "
                    + std::to_string(cfg.payload_bytes) + " payload octets");
  m_tree_height = 0;
  for (Round w = setup.aggregator.padded_rounds; w > 1; w >>= 1) ++m_tree_height;

  const std::size_t n = cfg.players;
  m_players.resize(n + 1);
  for (PlayerId id = 1; id <= n; ++id) {
    const auto& view = setup.players[id - 1];
    if (id == cfg.correspondent_a) {
      auto c = std::make_unique<Correspondent>(m_trapdoor, cfg.protocol, view, setup.view_a,
                                               Role::correspondent_a);
      m_a = c.get();
      m_players[id] = std::move(c);
    }
    else if (id == cfg.correspondent_b) {
      auto c = std::make_unique<Correspondent>(m_trapdoor, cfg.protocol, view, setup.view_b,
                                               Role::correspondent_b);
      m_b = c.get();
      m_players[id] = std::move(c);
    }
    else {
      m_players[id] = std::make_unique<Player>(m_public, cfg.protocol, view);
    }
  }
  for (const auto& adv : cfg.adversaries) m_adversaries[adv.player] = adv.strategy;

  m_agg_view = std::make_shared<const AggregatorView>(setup.aggregator);
  m_aggregators.resize(n + 1);

  for (std::uint32_t id = 0; id <= n; ++id) {
    m_up.emplace_back(cfg.uplink_loss);
    m_down.emplace_back(cfg.broadcast_loss ? cfg.uplink_loss : LossSpec{});
    m_up_rng.push_back(make_stream(cfg.seed, Stream::uplink, id));
    m_down_rng.push_back(make_stream(cfg.seed, Stream::downlink, id));
    m_adv_rng.push_back(make_stream(cfg.seed, Stream::adversary, id));
  }
  m_result.rounds.resize(cfg.rounds);
  m_result.traffic.resize(n + 1);
  m_result.duration_s = static_cast<double>(cfg.rounds) / cfg.rate_hz;
}

std::vector<PlayerId> Simulation::senders_of(Round round) const
{
  const PlayerId agg = aggregator_of(round);
  std::vector<PlayerId> out;
  out.reserve(m_cfg.players);
  for (PlayerId id = 1; id <= m_cfg.players; ++id)
    if (id != agg) out.push_back(id);
  return out;
}

Aggregator& Simulation::aggregator_node(PlayerId node)
{
  auto& slot = m_aggregators[node];
  if (!slot) slot = std::make_unique<Aggregator>(m_public, m_cfg.protocol, m_agg_view);
  return *slot;
}

Correspondent* Simulation::correspondent(PlayerId id) const
{
  if (m_a && m_a->index() == id) return m_a;
  if (m_b && m_b->index() == id) return m_b;
  return nullptr;
}

std::optional<Scalar> Simulation::draw_message()
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool speaks = unit(m_msg_rng) < m_cfg.speak_probability;
  Scalar m;
  if (m_framed) {
    Bytes payload(m_cfg.payload_bytes);
    for (auto& b : payload) b = static_cast<std::uint8_t>(m_msg_rng() & 0xff);
    m = encode_frame(m_public, payload);
  }
  else {
    do m = random_scalar(m_public, m_msg_rng);
    while (m.value == 0);
  }
  if (!speaks) return std::nullopt;
  return m;
}

std::optional<CollectionPacket> Simulation::adversarial_packet(PlayerId id, AdversaryStrategy s,
                                                               Round j)
{
  const Player& self = *m_players[id];
  const Round J = m_cfg.rounds;
  if (s == AdversaryStrategy::drop_silently) return std::nullopt;
  if (J == 1 && s != AdversaryStrategy::random_opening) s = AdversaryStrategy::random_opening;

  CollectionPacket pkt = self.emit(j);
  switch (s) {
  case AdversaryStrategy::random_opening: {
    Rng& rng = m_adv_rng[id];
    pkt.opening = random_scalar(m_public, rng);
    if (pkt.blinding) pkt.blinding = random_scalar(m_public, rng);
    break;
  }
  case AdversaryStrategy::replayed_opening: {
    CollectionPacket old = self.emit(j > 1 ? j - 1 : 2);
    pkt.opening = old.opening;
    pkt.blinding = old.blinding;
    break;
  }
  case AdversaryStrategy::wrong_round_proof: {
    pkt = self.emit(j < J ? j + 1 : j - 1);
    pkt.round = j;
    break;
  }
  case AdversaryStrategy::drop_silently: break;
  }
  return pkt;
}

void Simulation::start_round(Round j)
{
  const double t = static_cast<double>(j - 1) * 1000.0 / m_cfg.rate_hz;
  const PlayerId agg = aggregator_of(j);
  const auto senders = senders_of(j);
  RoundTrace& tr = m_result.rounds[j - 1];
  tr.round = j;
  tr.aggregator = agg;
  tr.start_ms = t;
  tr.deadline_ms = t + m_cfg.deadline_ms;
  tr.recoveries = {{m_cfg.correspondent_a, Outcome::broadcast_lost, 0},
                   {m_cfg.correspondent_b, Outcome::broadcast_lost, 0}};

  aggregator_node(agg).open_round(j, senders, tr.deadline_ms);
  schedule(tr.deadline_ms, finalize, [this, j] { finalize_round(j); });

  // Both draws happen every round so the message stream stays aligned.
  std::optional<Scalar> msg_a = draw_message();
  std::optional<Scalar> msg_b = draw_message();

  for (PlayerId id : senders) {
    PacketRecord rec;
    rec.player = id;
    std::optional<CollectionPacket> pkt;
    if (auto it = m_adversaries.find(id); it != m_adversaries.end()) {
      rec.adversarial = true;
      pkt = adversarial_packet(id, it->second, j);
    }
    else if (id == m_cfg.correspondent_a) {
      pkt = m_a->emit(j, msg_a);
    }
    else if (id == m_cfg.correspondent_b) {
      pkt = m_b->emit(j, msg_b);
    }
    else {
      pkt = m_players[id]->emit(j);
    }
    if (!pkt) {
      tr.packets.push_back(rec);
      continue;
    }

    rec.sent_at = t;
    rec.bytes = m_cfg.packet_bytes ? m_cfg.packet_bytes
                                   : collection_size(m_public, m_cfg.protocol, m_tree_height);
    ++tr.counters.packets_sent;
    tr.counters.bytes_sent += rec.bytes;
    m_result.traffic[id].packets_out += 1;
    m_result.traffic[id].bytes_out += rec.bytes;
    note(t, "send", j, id, agg);

    const bool lost = m_up[id].drop(m_up_rng[id]);
    const double latency = m_cfg.latency.sample_ms(m_up_rng[id]);
    if (lost) {
      rec.delivery = Delivery::lost;
      ++tr.counters.packets_lost;
      note(t, "lost", j, id, agg);
    }
    else {
      schedule(t + latency, arrival,
               [this, j, id, p = std::move(*pkt), when = t + latency] { arrive(j, id, p, when); });
    }
    tr.packets.push_back(rec);
  }
}

void Simulation::arrive(Round j, PlayerId sender, const CollectionPacket& pkt, double time)
{
  RoundTrace& tr = m_result.rounds[j - 1];
  const PlayerId agg = tr.aggregator;
  Verdict v = aggregator_node(agg).ingest(pkt, time);
  PacketRecord* rec = nullptr;
  for (auto& p : tr.packets)
    if (p.player == sender) rec = &p;
  rec->arrived_at = time;
  rec->verdict = v;
  m_result.traffic[agg].packets_in += 1;
  m_result.traffic[agg].bytes_in += rec->bytes;
  if (v == Verdict::late_arrival) {
    rec->delivery = Delivery::late;
    ++tr.counters.packets_late;
    note(time, "late", j, sender, agg);
  }
  else {
    rec->delivery = Delivery::delivered;
    ++tr.counters.packets_delivered;
    note(time, v == Verdict::accepted ? "accept" : "reject", j, sender, agg,
         v == Verdict::accepted ? std::string{} : to_string(v));
  }
}

void Simulation::finalize_round(Round j)
{
  RoundTrace& tr = m_result.rounds[j - 1];
  const PlayerId agg = tr.aggregator;
  BroadcastPacket bc = aggregator_node(agg).finalize(j);
  tr.received = bc.received;
  tr.sum = bc.sum;
  const double t = tr.deadline_ms;
  note(t, "broadcast", j, agg, -1, std::to_string(bc.received.size()));

  const std::size_t size = m_cfg.packet_bytes
                               ? m_cfg.packet_bytes
                               : broadcast_size(m_public, m_cfg.protocol, bc.received.size());
  for (PlayerId id = 1; id <= m_cfg.players; ++id) {
    if (id == agg) {
      if (correspondent(id)) recover(j, id, bc, t);
      continue;
    }
    ++tr.counters.broadcasts_sent;
    tr.counters.broadcast_bytes += size;
    m_result.traffic[agg].packets_out += 1;
    m_result.traffic[agg].bytes_out += size;
    const bool lost = m_down[id].drop(m_down_rng[id]);
    const double latency = m_cfg.latency.sample_ms(m_down_rng[id]);
    if (lost) {
      ++tr.counters.broadcasts_lost;
      tr.broadcast_missed.push_back(id);
      note(t, "broadcast_lost", j, agg, id);
      continue;
    }
    schedule(t + latency, arrival, [this, j, id, bc, size, when = t + latency] {
      RoundTrace& r = m_result.rounds[j - 1];
      ++r.counters.broadcasts_delivered;
      m_result.traffic[id].packets_in += 1;
      m_result.traffic[id].bytes_in += size;
      note(when, "deliver", j, r.aggregator, id);
      if (correspondent(id)) recover(j, id, bc, when);
    });
  }
}

void Simulation::recover(Round j, PlayerId who, const BroadcastPacket& bc, double time)
{
  RoundTrace& tr = m_result.rounds[j - 1];
  Correspondent& self = *correspondent(who);
  const Correspondent& peer = *correspondent(self.peer());
  const bool peer_in_list =
      std::binary_search(bc.received.begin(), bc.received.end(), peer.index());
  const Scalar truth = peer.sent(j);

  Outcome outcome;
  bool suspicious = false;
  if (m_cfg.protocol.variant == Variant::no_list) {
    auto senders = senders_of(j);
    ListFreeRecovery r = self.recover_without_list(
        bc.sum, j, m_cfg.max_missing, senders,
        [this](const Scalar& m) { return is_plausible_frame(m_public, m); });
    if (!r.decoded)
      outcome = Outcome::undecodable;
    else if (r.peer_absent)
      outcome = peer_in_list ? Outcome::garbled : Outcome::peer_absent;
    else
      outcome = peer_in_list && r.message == truth ? Outcome::ok : Outcome::garbled;
  }
  else if (m_cfg.protocol.level == Level::simple) {
    // Zero-sum keys: whatever arrived, the peer's message is X minus our own.
    Scalar m = sub(m_public, bc.sum, self.sent(j));
    outcome = m == truth ? Outcome::ok : Outcome::garbled;
  }
  else {
    auto m = self.recover_message(bc);
    if (!m) {
      outcome = Outcome::peer_absent;
      suspicious = self.strip_keys(bc).value != 0;
    }
    else {
      outcome = *m == truth ? Outcome::ok : Outcome::garbled;
      suspicious = m_framed && !is_plausible_frame(m_public, *m);
    }
  }
  for (auto& rec : tr.recoveries)
    if (rec.correspondent == who) {
      rec.outcome = outcome;
      rec.at = time;
    }
  note(time, "recover", j, tr.aggregator, who, to_string(outcome));

  if (m_cfg.protocol.variant == Variant::optimistic && suspicious && m_audited.insert(j).second)
    schedule(time + m_cfg.audit_delay_ms, audit,
             [this, j, who, when = time + m_cfg.audit_delay_ms] { run_audit(j, who, when); });
}

void Simulation::run_audit(Round j, PlayerId who, double time)
{
  RoundTrace& tr = m_result.rounds[j - 1];
  const Correspondent& self = *correspondent(who);
  const auto& log = aggregator_node(tr.aggregator).published_log(j);
  auto flagged = audit_round(m_trapdoor, log, self.keys(), j);
  tr.flagged.assign(flagged.begin(), flagged.end());
  for (PlayerId id : flagged)
    for (PlayerId node = 0; node <= m_cfg.players; ++node) aggregator_node(node).ban(id);
  std::string detail;
  for (PlayerId id : flagged) detail += (detail.empty() ? "" : ",") + std::to_string(id);
  note(time, "audit", j, who, -1, detail);
}

SimResult Simulation::run()
{
  for (Round j = 1; j <= m_cfg.rounds; ++j)
    schedule(static_cast<double>(j - 1) * 1000.0 / m_cfg.rate_hz, round_start,
             [this, j] { start_round(j); });
  while (!m_queue.empty()) {
    Queued ev = m_queue.top();
    m_queue.pop();
    ev.action();
  }
  return std::move(m_result);
}

} // namespace

SimResult run_simulation(const SimConfig& cfg, const SetupBundle& setup)
{
  Simulation sim(cfg, setup);
  return sim.run();
}

std::string events_jsonl(const SimResult& result)
{
  std::string out;
  for (const auto& ev : result.events) {
    nlohmann::ordered_json j;
    j["t"] = ev.time;
    j["kind"] = ev.kind;
    j["round"] = ev.round;
    if (ev.from >= 0) j["from"] = ev.from;
    if (ev.to >= 0) j["to"] = ev.to;
    if (!ev.detail.empty()) j["detail"] = ev.detail;
    out += j.dump();
    out += '\n';
  }
  return out;
}

} // namespace dcnet
