#include "dcnet/protocol.hpp"

#include <algorithm>

#include "dcnet/error.hpp"

namespace dcnet {

namespace {

std::shared_ptr<const MerkleSchedule> rebuild_tree(const GroupParams& params, const PlayerView& view)
{
  const Round padded = padded_length(view.rounds);
  auto cs = schedule_commitments(params, view, padded);
  std::vector<Bytes> leaves;
  leaves.reserve(cs.size());
  for (const auto& c : cs) leaves.push_back(encode_element(params, c));
  return std::make_shared<const MerkleSchedule>(leaves, Bytes{});
}

} // namespace

Player::Player(GroupParams params, ProtocolConfig config, PlayerView view)
  : m_params(std::move(params))
  , m_config(config)
  , m_view(std::move(view))
{
  if (m_config.carries_proof() && !m_view.tree)
    m_view.tree = rebuild_tree(m_params, m_view);
}

CollectionPacket Player::emit(Round round) const { return packet_for(round, Scalar(0)); }

CollectionPacket Player::packet_for(Round round, const Scalar& message) const
{
  SecretPair pair = m_view.pair(m_params, round);
  CollectionPacket pkt;
  pkt.round = round;
  pkt.sender = m_view.index;
  if (message.value == 0) {
    pkt.opening = pair.k;
    if (m_config.carries_blinding()) pkt.blinding = pair.r;
  }
  else {
    Opening o = equivocate(m_params, pair.k, pair.r, message);
    pkt.opening = o.value;
    if (m_config.carries_blinding()) pkt.blinding = o.blinding;
  }
  if (m_config.carries_proof())
    pkt.proof = m_view.tree->prove(static_cast<std::uint32_t>(round));
  return pkt;
}

Correspondent::Correspondent(GroupParams trapdoor_params, ProtocolConfig config, PlayerView own,
                             CorrespondentView keys, Role role)
  : Player(std::move(trapdoor_params), config, std::move(own))
  , m_role(role)
  , m_keys(std::move(keys))
{
  if (!m_params.alpha)
    throw Error(Errc::missing_trapdoor, "correspondent needs log_g h");
  if (role == Role::bystander)
    throw Error(Errc::config_mismatch, "correspondent constructed with bystander role");
}

CollectionPacket Correspondent::emit(Round round, const std::optional<Scalar>& message)
{
  Scalar m = message ? reduce(m_params, message->value) : Scalar(0);
  CollectionPacket pkt = packet_for(round, m);
  m_sent[round] = std::move(m);
  return pkt;
}

Scalar Correspondent::sent(Round round) const
{
  auto it = m_sent.find(round);
  return it == m_sent.end() ? Scalar(0) : it->second;
}

Scalar Correspondent::strip_keys(const BroadcastPacket& bc) const
{
  Scalar rest = bc.sum;
  for (PlayerId i : bc.received) rest = sub(m_params, rest, m_keys.pair(m_params, i, bc.round).k);
  if (std::binary_search(bc.received.begin(), bc.received.end(), index()))
    rest = sub(m_params, rest, sent(bc.round));
  return rest;
}

std::optional<Scalar> Correspondent::recover_message(const BroadcastPacket& bc) const
{
  if (!std::binary_search(bc.received.begin(), bc.received.end(), peer())) return std::nullopt;
  return strip_keys(bc);
}

ListFreeRecovery Correspondent::recover_without_list(const Scalar& sum, Round round,
                                                     std::size_t max_missing,
                                                     std::span<const PlayerId> expected,
                                                     const Plausibility& plausible) const
{
  const std::size_t n = expected.size();
  std::vector<Scalar> keys(n);
  Scalar total(0);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = m_keys.pair(m_params, expected[i], round).k;
    total = add(m_params, total, keys[i]);
  }
  const Scalar own = sent(round);

  ListFreeRecovery out;
  std::vector<std::size_t> missing;
  auto consider = [&] {
    Scalar cand = sub(m_params, sum, total);
    bool self_in = true, peer_in = true;
    for (std::size_t idx : missing) {
      cand = add(m_params, cand, keys[idx]);
      if (expected[idx] == index()) self_in = false;
      if (expected[idx] == peer()) peer_in = false;
    }
    if (self_in && has_sent(round)) cand = sub(m_params, cand, own);
    bool ok = peer_in ? plausible(cand) : cand.value == 0;
    if (!ok) return;
    ++out.candidates;
    out.message = peer_in ? cand : Scalar(0);
    out.peer_absent = !peer_in;
    out.missing.clear();
    for (std::size_t idx : missing) out.missing.push_back(expected[idx]);
  };

  // Missing sets in order of size, each as ascending index combinations.
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t start, std::size_t left) {
    if (left == 0) {
      consider();
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      missing.push_back(i);
      walk(i + 1, left - 1);
      missing.pop_back();
    }
  };
  for (std::size_t size = 0; size <= std::min(max_missing, n); ++size) walk(0, size);

  out.decoded = out.candidates == 1;
  if (!out.decoded) {
    out.message = Scalar(0);
    out.missing.clear();
    out.peer_absent = false;
  }
  return out;
}

const char* to_string(Verdict v) noexcept
{
  switch (v) {
  case Verdict::accepted: return "accepted";
  case Verdict::bad_opening: return "BadOpening";
  case Verdict::bad_proof: return "BadProof";
  case Verdict::missing_field: return "MissingField";
  case Verdict::duplicate_sender: return "DuplicateSender";
  case Verdict::wrong_round: return "WrongRound";
  case Verdict::late_arrival: return "LateArrival";
  case Verdict::unknown_sender: return "UnknownSender";
  case Verdict::banned: return "Banned";
  }
  return "unknown";
}

Aggregator::Aggregator(GroupParams public_params, ProtocolConfig config,
                       std::shared_ptr<const AggregatorView> view)
  : m_params(public_params.public_part())
  , m_config(config)
  , m_view(std::move(view))
{
  if (!m_view)
    throw Error(Errc::config_mismatch, "aggregator needs a setup view");
  if (m_config.carries_proof() && m_view->roots.size() != m_view->players)
    throw Error(Errc::config_mismatch, "level 4 aggregator needs one root per player");
  if (m_config.carries_blinding() && m_config.level == Level::verified
      && m_view->commitments.size() != m_view->players)
    throw Error(Errc::config_mismatch, "level 3 aggregator needs per-player commitments");
}

void Aggregator::open_round(Round round, std::vector<PlayerId> expected, double deadline)
{
  if (round < 1 || round > m_view->rounds)
    throw Error(Errc::schedule_exhausted, "round " + std::to_string(round) + " outside schedule");
  Buffer buf;
  buf.deadline = deadline;
  buf.expected.insert(expected.begin(), expected.end());
  m_open[round] = std::move(buf);
}

Verdict Aggregator::verify(const CollectionPacket& pkt) const
{
  if (!m_config.carries_blinding()) return Verdict::accepted;
  if (!pkt.blinding) return Verdict::missing_field;
  if (m_config.level == Level::verified) {
    const auto& c = m_view->commitments[pkt.sender - 1][pkt.round - 1];
    return verify_opening(m_params, c, pkt.opening, *pkt.blinding) ? Verdict::accepted
                                                                    : Verdict::bad_opening;
  }
  if (!pkt.proof) return Verdict::missing_field;
  Commitment c = commit(m_params, pkt.opening, *pkt.blinding);
  Bytes leaf = encode_element(m_params, c);
  return verify_position(m_view->roots[pkt.sender - 1], leaf, static_cast<std::uint32_t>(pkt.round),
                         *pkt.proof)
             ? Verdict::accepted
             : Verdict::bad_proof;
}

Verdict Aggregator::ingest(const CollectionPacket& pkt, double arrival_time)
{
  auto it = m_open.find(pkt.round);
  if (it == m_open.end())
    return m_closed.count(pkt.round) ? Verdict::late_arrival : Verdict::wrong_round;
  Buffer& buf = it->second;
  if (arrival_time > buf.deadline) return Verdict::late_arrival;
  if (!buf.expected.count(pkt.sender)) return Verdict::unknown_sender;
  if (m_banned.count(pkt.sender)) return Verdict::banned;
  if (buf.accepted.count(pkt.sender)) return Verdict::duplicate_sender;
  Verdict v = verify(pkt);
  if (v == Verdict::accepted) buf.accepted.emplace(pkt.sender, pkt);
  return v;
}

BroadcastPacket Aggregator::finalize(Round round)
{
  BroadcastPacket bc;
  bc.round = round;
  bc.sum = Scalar(0);
  auto it = m_open.find(round);
  if (it == m_open.end()) return bc;
  std::vector<CollectionPacket> log;
  for (auto& [sender, pkt] : it->second.accepted) {
    bc.received.push_back(sender);
    bc.sum = add(m_params, bc.sum, pkt.opening);
    log.push_back(std::move(pkt));
  }
  m_open.erase(it);
  m_closed.insert(round);
  if (m_config.variant == Variant::optimistic) m_logs[round] = std::move(log);
  return bc;
}

const std::vector<CollectionPacket>& Aggregator::published_log(Round round) const
{
  static const std::vector<CollectionPacket> empty;
  auto it = m_logs.find(round);
  return it == m_logs.end() ? empty : it->second;
}

std::set<PlayerId> audit_round(const GroupParams& params, std::span<const CollectionPacket> log,
                               const CorrespondentView& keys, Round round)
{
  std::set<PlayerId> faulty;
  for (const auto& pkt : log) {
    if (pkt.sender == keys.index || pkt.sender == keys.peer) continue;
    if (pkt.round != round || !(pkt.opening == keys.pair(params, pkt.sender, round).k))
      faulty.insert(pkt.sender);
  }
  return faulty;
}

} // namespace dcnet
