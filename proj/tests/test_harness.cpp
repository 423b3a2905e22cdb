#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcnet/bundle_io.hpp"
#include "dcnet/error.hpp"
#include "dcnet/privacy.hpp"
#include "dcnet/report.hpp"
#include "dcnet/scenario.hpp"

using namespace dcnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  fs::path dir = fs::temp_directory_path() / ("dcnet-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args, const fs::path& out)
{
  const std::string cmd = std::string("DCNET_OUT_DIR=") + out.string() + " " DCNET_CLI " " + args
                          + " > " + (out / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("scenario text round trips")
{
  const std::string text = R"(# comment
id = sample
players = 7
rounds = 40
rate_hz = 25
protocol = 3
variant = optimistic
group = p256
latency = lognormal 0.9 0.1 50
loss = gilbert_elliott 0.02 0.4 0 0.9
broadcast_loss = false
adversary = 5 replayed_opening
adversary = 6 drop_silently
rotation = round_robin
deadline_ms = 250
seed = 99
packet_bytes = 120
correspondents = 2 4
speak_probability = 0.5
payload_bytes = 8
max_missing = 3
audit_delay_ms = 10
record_events = false
)";
  SimConfig cfg = parse_scenario(text);
  CHECK(cfg.id == "sample");
  CHECK(cfg.players == 7);
  CHECK(cfg.protocol.level == Level::verified);
  CHECK(cfg.protocol.variant == Variant::optimistic);
  CHECK(cfg.latency.unit_ms == 50);
  CHECK(cfg.uplink_loss.kind == LossSpec::Kind::gilbert_elliott);
  CHECK(cfg.uplink_loss.ge.loss_bad == 0.9);
  REQUIRE(cfg.adversaries.size() == 2);
  CHECK(cfg.adversaries[1].strategy == AdversaryStrategy::drop_silently);
  CHECK(cfg.rotation == Rotation::round_robin);
  CHECK(cfg.correspondent_a == 2);
  CHECK(cfg.correspondent_b == 4);
  CHECK_FALSE(cfg.record_events);

  CHECK(format_scenario(parse_scenario(format_scenario(cfg))) == format_scenario(cfg));
}

TEST_CASE("scenario errors name the line")
{
  auto fails_on = [](const std::string& text, const std::string& needle) {
    try {
      parse_scenario(text);
    }
    catch (const Error& e) {
      CHECK(e.code() == Errc::config_mismatch);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("no error for: " << text);
  };
  fails_on("players = 5\nbogus = 1\n", "2");
  fails_on("players = five\n", "1");
  fails_on("protocol = 7\n", "1");
  fails_on("loss = bernoulli\n", "1");
  fails_on("latency = cauchy 1\n", "1");
  fails_on("no equals sign\n", "1");
  CHECK_THROWS_AS(read_scenario("/nonexistent/dir/scenario.txt"), Error);
}

TEST_CASE("report recomputed from persisted rounds equals the original")
{
  SimConfig cfg;
  cfg.players = 6;
  cfg.rounds = 300;
  cfg.uplink_loss = {LossSpec::Kind::bernoulli, 0.05, {}};
  cfg.adversaries = {{5, AdversaryStrategy::random_opening}};
  SimResult res = run_simulation(cfg, make_setup(cfg));

  const std::string jsonl = rounds_jsonl(res.rounds);
  auto parsed = parse_rounds_jsonl(jsonl);
  CHECK(rounds_jsonl(parsed) == jsonl);
  CHECK(report_csv(summarize(cfg, parsed)) == report_csv(summarize(cfg, res.rounds)));
  CHECK(traffic_from_traces(parsed, cfg.players) == res.traffic);

  RunReport rep = summarize(cfg, res.rounds);
  CHECK(rep.packets_sent == rep.packets_delivered + rep.packets_lost + rep.packets_late);
  std::uint64_t total = 0;
  for (auto c : rep.outcomes) total += c;
  CHECK(total == 2 * cfg.rounds);
  CHECK(report_csv(rep).rfind("metric,value\n", 0) == 0);
  CHECK_THROWS_AS(parse_rounds_jsonl("{not json}\n"), Error);
}

TEST_CASE("setup bundles survive the filesystem")
{
  for (Level level : {Level::verified, Level::merkle}) {
    SimConfig cfg;
    cfg.players = 3;
    cfg.rounds = 5;
    cfg.protocol.level = level;
    SetupBundle bundle = make_setup(cfg);
    fs::path dir = scratch("bundle-" + std::to_string(static_cast<int>(level)));
    write_setup(dir, bundle);
    for (const char* f : {"group.txt", "manifest.json", "aggregator.json", "player-1.json",
                          "player-3.json", "correspondent-1.json", "correspondent-2.json"})
      CHECK(fs::exists(dir / f));
    CHECK(slurp(dir / "aggregator.json").find("\"alpha\"") == std::string::npos);

    SetupBundle back = read_setup(dir);
    CHECK(verification_material_consistent(back));
    CHECK(back.aggregator.roots == bundle.aggregator.roots);
    CHECK(back.view_a.seeds == bundle.view_a.seeds);
    CHECK(back.view_b.alpha == bundle.view_b.alpha);
    for (std::size_t i = 0; i < 3; ++i)
      for (Round j = 1; j <= 5; ++j)
        CHECK(back.players[i].pair(back.public_params, j)
              == bundle.players[i].pair(bundle.public_params, j));

    // A simulation on the reloaded bundle matches the in-memory one.
    CHECK(rounds_jsonl(run_simulation(cfg, back).rounds)
          == rounds_jsonl(run_simulation(cfg, bundle).rounds));

    SetupBundle tampered = back;
    tampered.view_a.seeds[1][0] ^= 1;
    CHECK_FALSE(verification_material_consistent(tampered));

    std::string player = slurp(dir / "player-2.json");
    std::ofstream(dir / "player-2.json") << player.substr(0, player.size() / 2);
    CHECK_THROWS_AS(read_setup(dir), Error);
  }
  CHECK_THROWS_AS(read_setup("/nonexistent/setup"), Error);
}

TEST_CASE("privacy experiment")
{
  PrivacyOptions opt;
  opt.trials = 3000;
  opt.players = 3;
  PrivacyReport r = run_privacy_experiment(opt);
  CHECK(r.honest == 3);
  CHECK(r.pairs == 3);
  CHECK(r.chance == doctest::Approx(1.0 / 3));
  CHECK(r.sigma == doctest::Approx(std::sqrt(1.0 / 3 * 2.0 / 3 / 3000)));
  CHECK(std::abs(r.z) < 3);
  CHECK(r.rejected == 0);

  opt.players = 6;
  opt.corrupted = 2;
  r = run_privacy_experiment(opt);
  CHECK(r.honest == 4);
  CHECK(r.pairs == 6);
  CHECK(std::abs(r.z) < 3);

  opt.knowledge = AdversaryKnowledge::keys;
  opt.trials = 500;
  r = run_privacy_experiment(opt);
  CHECK(r.accuracy == 1.0);

  opt.corrupted = 4;
  CHECK_THROWS_AS(run_privacy_experiment(opt), Error);
}

TEST_CASE("command line exit codes")
{
  fs::path out = scratch("cli");
  CHECK(cli("setup --players 4 --rounds 8", out) == 0);
  CHECK(fs::exists(out / "manifest.json"));

  std::ofstream(out / "good.txt") << "players = 4\nrounds = 30\nloss = bernoulli 0.02\n";
  CHECK(cli("simulate --config " + (out / "good.txt").string(), out) == 0);
  for (const char* f : {"scenario.txt", "trace.jsonl", "rounds.jsonl", "report.csv"})
    CHECK(fs::exists(out / f));

  std::ofstream(out / "bad.txt") << "players = 4\nwhat = 1\n";
  CHECK(cli("simulate --config " + (out / "bad.txt").string(), out) == 2);
  CHECK(cli("simulate --config " + (out / "missing.txt").string(), out) == 3);
  CHECK(cli("simulate --protocol 9", out) == 2);
  CHECK(cli("privacy-test --players 4 --trials 200", out) == 0);
  CHECK(fs::exists(out / "privacy.csv"));
  CHECK(cli("perf --kind latency --n 1 10 100", out) == 0);
  CHECK(fs::exists(out / "latency.csv"));
}
