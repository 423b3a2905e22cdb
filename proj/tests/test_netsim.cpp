#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dcnet/error.hpp"
#include "dcnet/netsim.hpp"
#include "dcnet/report.hpp"

using namespace dcnet;

namespace {

SimConfig base_config()
{
  SimConfig cfg;
  cfg.id = "test";
  cfg.players = 5;
  cfg.rounds = 200;
  cfg.protocol = {Level::merkle, Variant::list};
  cfg.latency.kind = LatencySpec::Kind::fixed;
  cfg.latency.fixed_ms = 20;
  return cfg;
}

SimResult run(const SimConfig& cfg) { return run_simulation(cfg, make_setup(cfg)); }

} // namespace

TEST_CASE("gilbert-elliott: absorbing good state never loses")
{
  GilbertElliottParams ge{0.0, 0.5, 0.0, 1.0};
  Rng rng(1);
  ChannelState st = ChannelState::good;
  for (int i = 0; i < 100000; ++i) {
    auto step = gilbert_elliott_step(st, ge, rng);
    REQUIRE_FALSE(step.lost);
    st = step.next;
  }
  CHECK(gilbert_elliott_stationary_loss(ge) == 0.0);
}

TEST_CASE("gilbert-elliott: stationary loss matches the Markov prediction")
{
  for (GilbertElliottParams ge : {GilbertElliottParams{0.01, 0.5, 0.0, 1.0},
                                  GilbertElliottParams{0.05, 0.2, 0.01, 0.7},
                                  GilbertElliottParams{0.5, 0.5, 0.0, 1.0}}) {
    LossChannel ch({LossSpec::Kind::gilbert_elliott, 0, ge});
    Rng rng(2);
    const int steps = 1000000;
    int lost = 0;
    for (int i = 0; i < steps; ++i) lost += ch.drop(rng);
    const double predicted =
        (ge.p_good_to_bad * ge.loss_bad + ge.p_bad_to_good * ge.loss_good)
        / (ge.p_good_to_bad + ge.p_bad_to_good);
    CHECK(gilbert_elliott_stationary_loss(ge) == doctest::Approx(predicted));
    CHECK(std::abs(static_cast<double>(lost) / steps - predicted) <= 0.005);
  }
}

TEST_CASE("gilbert-elliott: symmetric chain has mean burst length 2")
{
  LossChannel ch({LossSpec::Kind::gilbert_elliott, 0, {0.5, 0.5, 0.0, 1.0}});
  Rng rng(3);
  long bursts = 0, burst_total = 0, run = 0;
  for (int i = 0; i < 1000000; ++i) {
    if (ch.drop(rng)) ++run;
    else if (run > 0) {
      ++bursts;
      burst_total += run;
      run = 0;
    }
  }
  CHECK(static_cast<double>(burst_total) / bursts == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("rotation")
{
  CHECK(rotate_aggregator(1, 5) == 1);
  CHECK(rotate_aggregator(6, 5) == 1);
  CHECK(rotate_aggregator(5, 5) == 5);
  std::vector<int> served(8, 0);
  for (Round j = 1; j <= 7 * 3; ++j) ++served[rotate_aggregator(j, 7)];
  for (std::size_t i = 1; i <= 7; ++i) CHECK(served[i] == 3);
}

TEST_CASE("lossless channel: full lists and perfect recovery")
{
  for (Level level : {Level::simple, Level::loss_resilient, Level::verified, Level::merkle}) {
    SimConfig cfg = base_config();
    cfg.protocol.level = level;
    SimResult res = run(cfg);
    for (const auto& r : res.rounds) {
      CHECK(r.received.size() == 5);
      for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::ok);
    }
  }
}

TEST_CASE("total loss: empty lists, peers absent")
{
  SimConfig cfg = base_config();
  cfg.uplink_loss = {LossSpec::Kind::bernoulli, 1.0, {}};
  cfg.broadcast_loss = false;
  SimResult res = run(cfg);
  for (const auto& r : res.rounds) {
    CHECK(r.received.empty());
    CHECK(r.sum == Scalar(0));
    for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::peer_absent);
  }
}

TEST_CASE("conservation and deadline semantics")
{
  SimConfig cfg = base_config();
  cfg.rounds = 500;
  cfg.latency = {};
  cfg.latency.s = 0.3; // wide enough that some packets miss the deadline
  cfg.deadline_ms = 300;
  cfg.uplink_loss = {LossSpec::Kind::bernoulli, 0.05, {}};
  SimResult res = run(cfg);
  std::uint64_t late = 0;
  for (const auto& r : res.rounds) {
    const auto& c = r.counters;
    CHECK(c.packets_sent == c.packets_delivered + c.packets_lost + c.packets_late);
    CHECK(c.broadcasts_sent == c.broadcasts_delivered + c.broadcasts_lost);
    late += c.packets_late;
    for (const auto& p : r.packets) {
      const bool listed = std::binary_search(r.received.begin(), r.received.end(), p.player);
      if (p.delivery == Delivery::late) {
        CHECK(p.arrived_at > r.deadline_ms);
        CHECK_FALSE(listed);
      }
      if (listed) CHECK(p.arrived_at <= r.deadline_ms);
    }
  }
  CHECK(late > 0);
  CHECK(traffic_from_traces(res.rounds, cfg.players) == res.traffic);
}

TEST_CASE("bernoulli loss-free ratio matches (1-p)^n")
{
  SimConfig cfg = base_config();
  cfg.players = 10;
  cfg.rounds = 10000;
  cfg.protocol.level = Level::loss_resilient;
  cfg.uplink_loss = {LossSpec::Kind::bernoulli, 0.01, {}};
  cfg.record_events = false;
  RunReport rep = summarize(cfg, run(cfg).rounds);
  CHECK(std::pow(0.99, 10) == doctest::Approx(0.9044).epsilon(1e-4));
  CHECK(std::abs(rep.lossfree_ratio - std::pow(0.99, 10)) <= 0.01);
}

TEST_CASE("adversaries under protocols 4 and 2")
{
  SimConfig cfg = base_config();
  cfg.group = "p256";
  cfg.rounds = 100;
  cfg.adversaries = {{3, AdversaryStrategy::random_opening},
                     {4, AdversaryStrategy::replayed_opening}};
  SimResult res = run(cfg);
  for (const auto& r : res.rounds) {
    CHECK(r.packet_of(3)->verdict == Verdict::bad_proof);
    CHECK(r.packet_of(4)->verdict == Verdict::bad_proof);
    for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::ok);
  }

  cfg.adversaries = {{3, AdversaryStrategy::wrong_round_proof}};
  res = run(cfg);
  for (const auto& r : res.rounds) CHECK(r.packet_of(3)->verdict == Verdict::bad_proof);

  cfg.protocol.level = Level::verified;
  res = run(cfg);
  for (const auto& r : res.rounds) {
    CHECK(r.packet_of(3)->verdict == Verdict::bad_opening);
    for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::ok);
  }

  cfg.protocol.level = Level::loss_resilient;
  cfg.adversaries = {{3, AdversaryStrategy::random_opening}};
  res = run(cfg);
  for (const auto& r : res.rounds) {
    CHECK(r.packet_of(3)->verdict == Verdict::accepted);
    for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::garbled);
  }

  cfg.adversaries = {{3, AdversaryStrategy::drop_silently}};
  res = run(cfg);
  for (const auto& r : res.rounds) {
    CHECK(r.packet_of(3)->delivery == Delivery::not_sent);
    for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::ok);
  }
}

TEST_CASE("optimistic variant bans a flagged player once the audit lands")
{
  SimConfig cfg = base_config();
  cfg.group = "p256";
  cfg.rounds = 40;
  cfg.deadline_ms = 60;
  cfg.audit_delay_ms = 15;
  cfg.protocol = {Level::merkle, Variant::optimistic};
  cfg.adversaries = {{4, AdversaryStrategy::random_opening}};
  SimResult res = run(cfg);
  CHECK(res.rounds[0].flagged == std::vector<PlayerId>{4});
  for (const auto& rec : res.rounds[0].recoveries) CHECK(rec.outcome == Outcome::garbled);
  double first_recovery = res.rounds[0].recoveries[0].at;
  for (const auto& rec : res.rounds[0].recoveries) first_recovery = std::min(first_recovery, rec.at);
  const double banned_from = first_recovery + cfg.audit_delay_ms;
  std::size_t banned = 0;
  for (const auto& r : res.rounds) {
    if (r.start_ms <= banned_from) continue;
    ++banned;
    CHECK(r.packet_of(4)->verdict == Verdict::banned);
    CHECK(r.flagged.empty());
    for (const auto& rec : r.recoveries) CHECK(rec.outcome == Outcome::ok);
  }
  CHECK(banned > 20);
}

TEST_CASE("list-free variant decodes single bystander losses")
{
  SimConfig cfg = base_config();
  cfg.group = "p256";
  cfg.rounds = 300;
  cfg.protocol = {Level::merkle, Variant::no_list};
  cfg.uplink_loss = {LossSpec::Kind::bernoulli, 0.05, {}};
  cfg.broadcast_loss = false;
  cfg.max_missing = 2;
  SimResult res = run(cfg);
  for (const auto& r : res.rounds) {
    std::size_t lost = 0;
    for (const auto& p : r.packets) lost += p.delivery != Delivery::delivered;
    for (const auto& rec : r.recoveries) {
      CHECK(rec.outcome != Outcome::garbled);
      if (lost <= 2) CHECK(rec.outcome != Outcome::undecodable);
    }
  }
}

TEST_CASE("round robin: aggregator sends nothing and serves once per cycle")
{
  SimConfig cfg = base_config();
  cfg.rounds = 50;
  cfg.rotation = Rotation::round_robin;
  SimResult res = run(cfg);
  std::vector<int> served(6, 0);
  for (const auto& r : res.rounds) {
    ++served[r.aggregator];
    CHECK(r.packet_of(r.aggregator) == nullptr);
    CHECK(r.packets.size() == 4);
    for (const auto& rec : r.recoveries) {
      if (rec.correspondent == r.aggregator || r.aggregator == 1 || r.aggregator == 2)
        CHECK((rec.outcome == Outcome::peer_absent || rec.outcome == Outcome::ok));
      else
        CHECK(rec.outcome == Outcome::ok);
    }
  }
  for (int i = 1; i <= 5; ++i) CHECK(served[i] == 10);
  CHECK(res.traffic[0] == NodeTraffic{});
}

TEST_CASE("identical seeds give identical traces")
{
  SimConfig cfg = base_config();
  cfg.latency = {};
  cfg.uplink_loss = {LossSpec::Kind::gilbert_elliott, 0, {0.05, 0.3, 0.0, 1.0}};
  cfg.adversaries = {{4, AdversaryStrategy::random_opening}};
  const std::string a = events_jsonl(run(cfg));
  const std::string b = events_jsonl(run(cfg));
  CHECK(a == b);
  CHECK(rounds_jsonl(run(cfg).rounds) == rounds_jsonl(run(cfg).rounds));
  cfg.seed = 2;
  CHECK(events_jsonl(run(cfg)) != a);
}

TEST_CASE("config validation and bundle mismatch")
{
  SimConfig cfg = base_config();
  cfg.uplink_loss = {LossSpec::Kind::bernoulli, 1.5, {}};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = base_config();
  cfg.adversaries = {{1, AdversaryStrategy::random_opening}};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = base_config();
  cfg.protocol = {Level::merkle, Variant::no_list}; // toy group cannot frame payloads
  CHECK_THROWS_AS(run(cfg), Error);

  cfg = base_config();
  SetupBundle setup = make_setup(cfg);
  cfg.rounds += 1;
  try {
    run_simulation(cfg, setup);
    FAIL("expected ConfigMismatch");
  }
  catch (const Error& e) {
    CHECK(e.code() == Errc::config_mismatch);
  }
}

TEST_CASE("latency sampling")
{
  LatencySpec fixed;
  fixed.kind = LatencySpec::Kind::fixed;
  fixed.fixed_ms = 12.5;
  Rng rng(4);
  CHECK(fixed.sample_ms(rng) == 12.5);

  LatencySpec ln;
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += ln.sample_ms(rng);
  CHECK(sum / n == doctest::Approx(100.0 * std::exp(0.97 + 0.06 * 0.06 / 2)).epsilon(0.002));
}
