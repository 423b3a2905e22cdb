// dcnet: setup generation, simulation runs, privacy experiment and
// performance sweeps. Exit codes: 0 ok, 1 other failure, 2 bad
// configuration, 3 I/O or decode failure, 4 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dcnet/bundle_io.hpp"
#include "dcnet/error.hpp"
#include "dcnet/perf_models.hpp"
#include "dcnet/privacy.hpp"
#include "dcnet/report.hpp"
#include "dcnet/scenario.hpp"

namespace fs = std::filesystem;
using namespace dcnet;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_other = 1;
constexpr int exit_config = 2;
constexpr int exit_io = 3;
constexpr int exit_verify = 4;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> protocol;
  std::string variant;
};

fs::path out_dir(const Common& c)
{
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("DCNET_OUT_DIR")) return env;
  return ".";
}

void write_text(const fs::path& path, const std::string& text)
{
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
}

void apply_overrides(SimConfig& cfg, const Common& c)
{
  if (c.seed) cfg.seed = *c.seed;
  if (c.protocol) cfg.protocol.level = parse_level(std::to_string(*c.protocol));
  if (!c.variant.empty()) cfg.protocol.variant = parse_variant(c.variant);
  cfg.validate();
}

std::string fmt(double v)
{
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::vector<std::string> split_ws(const std::string& s)
{
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// ---------------------------------------------------------------------------

struct SetupArgs {
  std::size_t players = 5;
  Round rounds = 100;
  std::string group = "toy";
  std::vector<PlayerId> correspondents{1, 2};
};

int cmd_setup(const Common& c, const SetupArgs& a)
{
  SimConfig cfg;
  if (!c.config.empty()) cfg = read_scenario(c.config);
  else {
    cfg.players = a.players;
    cfg.rounds = a.rounds;
    cfg.group = a.group;
    cfg.correspondent_a = a.correspondents.at(0);
    cfg.correspondent_b = a.correspondents.at(1);
  }
  apply_overrides(cfg, c);
  SetupBundle bundle = make_setup(cfg);
  const fs::path dir = out_dir(c);
  write_setup(dir, bundle);
  SetupBundle back = read_setup(dir);
  if (!verification_material_consistent(back)) {
    std::cerr << "setup: aggregator material does not match the correspondent keys\n";
    return exit_verify;
  }
  std::cout << "setup: " << cfg.players << " players, " << cfg.rounds << " rounds, protocol "
            << static_cast<int>(cfg.protocol.level) << ", written to " << dir.string() << '\n';
  return exit_ok;
}

int cmd_simulate(const Common& c)
{
  if (c.config.empty()) throw Error(Errc::config_mismatch, "simulate needs --config");
  SimConfig cfg = read_scenario(c.config);
  apply_overrides(cfg, c);
  SimResult res = run_simulation(cfg, make_setup(cfg));
  RunReport rep = summarize(cfg, res.rounds);

  const fs::path dir = out_dir(c);
  write_text(dir / "scenario.txt", format_scenario(cfg));
  write_text(dir / "trace.jsonl", events_jsonl(res));
  write_text(dir / "rounds.jsonl", rounds_jsonl(res.rounds));
  write_text(dir / "report.csv", report_csv(rep));

  std::cout << "simulate " << cfg.id << ": " << rep.rounds << " rounds, loss-free "
            << fmt(rep.lossfree_ratio) << " (model " << fmt(rep.model_lossfree_ratio)
            << "), recoveries ok " << rep.outcomes[static_cast<std::size_t>(Outcome::ok)]
            << ", garbled " << rep.outcomes[static_cast<std::size_t>(Outcome::garbled)]
            << ", clean mismatches " << rep.clean_mismatches << '\n';
  return rep.clean_mismatches == 0 ? exit_ok : exit_verify;
}

struct PrivacyArgs {
  PrivacyOptions opt;
  bool keys = false;
};

int cmd_privacy(const Common& c, PrivacyArgs a)
{
  if (c.seed) a.opt.seed = *c.seed;
  a.opt.knowledge = a.keys ? AdversaryKnowledge::keys : AdversaryKnowledge::transcript;
  PrivacyReport r = run_privacy_experiment(a.opt);
  std::ostringstream csv;
  csv << "players,corrupted,honest,pairs,trials,adversary,correct,accuracy,chance,sigma,z,rejected\n"
      << a.opt.players << ',' << a.opt.corrupted << ',' << r.honest << ',' << r.pairs << ','
      << r.trials << ',' << (a.keys ? "keys" : "transcript") << ',' << r.correct << ','
      << fmt(r.accuracy) << ',' << fmt(r.chance) << ',' << fmt(r.sigma) << ',' << fmt(r.z) << ','
      << r.rejected << '\n';
  write_text(out_dir(c) / "privacy.csv", csv.str());
  std::cout << "privacy-test: accuracy " << fmt(r.accuracy) << " vs chance " << fmt(r.chance)
            << " (z = " << fmt(r.z) << ")\n";
  if (r.rejected) return exit_verify;
  if (!a.keys && std::abs(r.z) > 3) return exit_verify;
  return exit_ok;
}

struct PerfArgs {
  std::string kind = "all";
  std::vector<std::size_t> n{2, 5, 10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> p{0.001, 0.01, 0.05};
  double f = 50;
  std::size_t packet_bytes = 100;
  LatencyModel latency;
  Round loss_rounds = 0; // 0: model only
};

// Sweep files use the scenario syntax with list-valued keys:
// n, p, rate_hz, packet_bytes, latency (lognormal <u> <s> <unit_ms>), loss_rounds.
void read_sweep(const std::string& path, PerfArgs& a)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open sweep " + path);
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    auto eq = raw.find('=');
    if (split_ws(raw).empty()) continue;
    if (eq == std::string::npos)
      throw Error(Errc::config_mismatch, "sweep line " + std::to_string(line) + ": expected key = value");
    auto key = split_ws(raw.substr(0, eq));
    auto w = split_ws(raw.substr(eq + 1));
    if (key.size() != 1 || w.empty())
      throw Error(Errc::config_mismatch, "sweep line " + std::to_string(line) + ": malformed");
    try {
      if (key[0] == "n") {
        a.n.clear();
        for (auto& x : w) a.n.push_back(std::stoul(x));
      }
      else if (key[0] == "p") {
        a.p.clear();
        for (auto& x : w) a.p.push_back(std::stod(x));
      }
      else if (key[0] == "rate_hz") a.f = std::stod(w.at(0));
      else if (key[0] == "packet_bytes") a.packet_bytes = std::stoul(w.at(0));
      else if (key[0] == "loss_rounds") a.loss_rounds = std::stoull(w.at(0));
      else if (key[0] == "latency" && w.size() == 4 && w[0] == "lognormal")
        a.latency = {std::stod(w[1]), std::stod(w[2]), std::stod(w[3])};
      else throw Error(Errc::config_mismatch, "sweep line " + std::to_string(line) + ": unknown key");
    }
    catch (const std::logic_error&) {
      throw Error(Errc::config_mismatch, "sweep line " + std::to_string(line) + ": bad number");
    }
  }
}

int cmd_perf(const Common& c, PerfArgs a)
{
  if (!c.config.empty()) read_sweep(c.config, a);
  const fs::path dir = out_dir(c);
  const bool all = a.kind == "all";
  if (!all && a.kind != "latency" && a.kind != "loss" && a.kind != "bandwidth")
    throw Error(Errc::config_mismatch, "--kind must be latency, loss, bandwidth or all");

  if (all || a.kind == "latency") {
    std::ostringstream csv;
    csv << "n,u,s,unit_ms,expected_max_ms,increase_over_n1_ms\n";
    const double base = expected_max_latency_ms(a.latency, 1);
    for (std::size_t n : a.n) {
      const double e = expected_max_latency_ms(a.latency, n);
      csv << n << ',' << fmt(a.latency.u) << ',' << fmt(a.latency.s) << ','
          << fmt(a.latency.unit_ms) << ',' << fmt(e) << ',' << fmt(e - base) << '\n';
    }
    write_text(dir / "latency.csv", csv.str());
  }

  if (all || a.kind == "loss") {
    std::ostringstream csv;
    csv << "p,n,model_lossfree_ratio,rounds,simulated_lossfree_ratio\n";
    for (double p : a.p)
      for (std::size_t n : a.n) {
        csv << fmt(p) << ',' << n << ',' << fmt(lossfree_round_ratio(p, n)) << ',' << a.loss_rounds
            << ',';
        if (a.loss_rounds > 0) {
          SimConfig cfg;
          cfg.id = "loss";
          cfg.rounds = a.loss_rounds;
          cfg.protocol = {Level::loss_resilient, Variant::list};
          cfg.latency.kind = LatencySpec::Kind::fixed;
          cfg.latency.fixed_ms = 1;
          cfg.uplink_loss = {LossSpec::Kind::bernoulli, p, {}};
          cfg.record_events = false;
          cfg.players = n; // n senders to a dedicated aggregator
          if (c.seed) cfg.seed = *c.seed;
          RunReport rep = summarize(cfg, run_simulation(cfg, make_setup(cfg)).rounds);
          csv << fmt(rep.lossfree_ratio);
        }
        csv << '\n';
      }
    write_text(dir / "loss.csv", csv.str());
  }

  if (all || a.kind == "bandwidth") {
    std::ostringstream csv;
    csv << "n,f,packet_bytes,formula_total,formula_per_player,rate_total,rate_per_player,"
           "player_pps_out,player_pps_in,player_bps_out,player_bps_in,player_bps_combined,"
           "fixed_aggregator_pps_in,fixed_aggregator_pps_out,fixed_aggregator_bps_in,"
           "fixed_aggregator_bps_out\n";
    for (std::size_t n : a.n) {
      if (n < 2) continue;
      BandwidthFigures b = bandwidth_per_player(n, a.f, a.packet_bytes);
      TrafficMeasurement fixed =
          measure_traffic(n, a.f, a.packet_bytes, Rotation::fixed_aggregator, 2 * n);
      const auto& m = b.measured.mean_player;
      csv << n << ',' << fmt(a.f) << ',' << a.packet_bytes << ',' << fmt(b.formula_total) << ','
          << fmt(b.formula_per_player) << ',' << fmt(b.rate_total) << ','
          << fmt(b.rate_per_player) << ',' << fmt(m.packets_out) << ',' << fmt(m.packets_in)
          << ',' << fmt(m.bits_out) << ',' << fmt(m.bits_in) << ',' << fmt(m.bits_out + m.bits_in)
          << ',' << fmt(fixed.aggregator.packets_in) << ',' << fmt(fixed.aggregator.packets_out)
          << ',' << fmt(fixed.aggregator.bits_in) << ',' << fmt(fixed.aggregator.bits_out) << '\n';
    }
    write_text(dir / "bandwidth.csv", csv.str());
  }
  std::cout << "perf: wrote " << a.kind << " sweep to " << dir.string() << '\n';
  return exit_ok;
}

int exit_code_for(Errc e)
{
  switch (e) {
  case Errc::io_error:
  case Errc::decode_error: return exit_io;
  case Errc::config_mismatch:
  case Errc::out_of_range:
  case Errc::invalid_group:
  case Errc::group_too_small:
  case Errc::domain_error:
  case Errc::missing_trapdoor:
  case Errc::schedule_exhausted: return exit_config;
  }
  return exit_other;
}

void add_common(CLI::App* sub, Common& c)
{
  sub->add_option("--config", c.config, "scenario or sweep file");
  sub->add_option("--seed", c.seed, "RNG seed override");
  sub->add_option("--out", c.out, "output directory (default $DCNET_OUT_DIR or .)");
  sub->add_option("--protocol", c.protocol, "protocol level")->check(CLI::Range(1, 4));
  sub->add_option("--variant", c.variant, "list | no-list | optimistic")
      ->check(CLI::IsMember({"list", "no-list", "optimistic"}));
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"DC-net stream protocol: setup, simulation and analysis"};
  app.require_subcommand(1);

  Common common;
  SetupArgs setup_args;
  PrivacyArgs privacy_args;
  PerfArgs perf_args;

  auto* setup = app.add_subcommand("setup", "write per-role setup files");
  add_common(setup, common);
  setup->add_option("--players", setup_args.players, "number of players");
  setup->add_option("--rounds", setup_args.rounds, "rounds in the schedule");
  setup->add_option("--group", setup_args.group, "toy | p256 | generate:<bits> | <path>");
  setup->add_option("--correspondents", setup_args.correspondents, "two player ids")
      ->expected(2);

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write traces and a report");
  add_common(simulate, common);

  auto* privacy = app.add_subcommand("privacy-test", "guess the correspondents from transcripts");
  add_common(privacy, common);
  privacy->add_option("--players", privacy_args.opt.players, "number of players");
  privacy->add_option("--trials", privacy_args.opt.trials, "independent trials");
  privacy->add_option("--corrupted", privacy_args.opt.corrupted, "players colluding with the aggregator");
  privacy->add_option("--group", privacy_args.opt.group, "toy | p256 | generate:<bits> | <path>");
  privacy->add_flag("--keys", privacy_args.keys, "give the adversary every key pair");

  auto* perf = app.add_subcommand("perf", "closed-form latency, loss and bandwidth sweeps");
  add_common(perf, common);
  perf->add_option("--kind", perf_args.kind, "latency | loss | bandwidth | all");
  perf->add_option("--n", perf_args.n, "player counts");
  perf->add_option("--p", perf_args.p, "loss probabilities");
  perf->add_option("--rate", perf_args.f, "rounds per second");
  perf->add_option("--packet-bytes", perf_args.packet_bytes, "packet size for bandwidth");
  perf->add_option("--loss-rounds", perf_args.loss_rounds, "simulate this many rounds per loss point");

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*setup) return cmd_setup(common, setup_args);
    if (*simulate) return cmd_simulate(common);
    if (*privacy) return cmd_privacy(common, privacy_args);
    if (*perf) return cmd_perf(common, perf_args);
  }
  catch (const Error& e) {
    std::cerr << "dcnet: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  catch (const std::exception& e) {
    std::cerr << "dcnet: " << e.what() << '\n';
    return exit_other;
  }
  return exit_other;
}
