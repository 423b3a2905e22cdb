#include "dcnet/scenario.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "dcnet/error.hpp"

namespace dcnet {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s)
{
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

[[noreturn]] void bad(std::size_t line, const std::string& msg)
{
  throw Error(Errc::config_mismatch, "scenario line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& s, std::size_t line)
{
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  }
  catch (const std::exception&) {
  }
  bad(line, "expected a number, got '" + s + "'");
}

std::uint64_t to_uint(const std::string& s, std::size_t line)
{
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    }
  }
  catch (const std::exception&) {
  }
  bad(line, "expected a non-negative integer, got '" + s + "'");
}

bool to_bool(const std::string& s, std::size_t line)
{
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad(line, "expected true or false, got '" + s + "'");
}

std::string fmt(double v)
{
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

} // namespace

Level parse_level(const std::string& text)
{
  if (text == "1") return Level::simple;
  if (text == "2") return Level::loss_resilient;
  if (text == "3") return Level::verified;
  if (text == "4") return Level::merkle;
  throw Error(Errc::config_mismatch, "protocol must be 1, 2, 3 or 4");
}

Variant parse_variant(const std::string& text)
{
  if (text == "list") return Variant::list;
  if (text == "no-list") return Variant::no_list;
  if (text == "optimistic") return Variant::optimistic;
  throw Error(Errc::config_mismatch, "variant must be list, no-list or optimistic");
}

const char* to_string(Variant v) noexcept
{
  switch (v) {
  case Variant::list: return "list";
  case Variant::no_list: return "no-list";
  case Variant::optimistic: return "optimistic";
  }
  return "unknown";
}

SimConfig parse_scenario(const std::string& text)
{
  SimConfig cfg;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    const auto w = words(value);
    if (w.empty()) bad(line, "missing value for '" + key + "'");
    auto arity = [&](std::size_t n) {
      if (w.size() != n) bad(line, "'" + key + "' takes " + std::to_string(n) + " value(s)");
    };

    if (key == "id") cfg.id = value;
    else if (key == "players") { arity(1); cfg.players = to_uint(w[0], line); }
    else if (key == "rounds") { arity(1); cfg.rounds = to_uint(w[0], line); }
    else if (key == "rate_hz") { arity(1); cfg.rate_hz = to_double(w[0], line); }
    else if (key == "protocol") { arity(1); cfg.protocol.level = parse_level(w[0]); }
    else if (key == "variant") { arity(1); cfg.protocol.variant = parse_variant(w[0]); }
    else if (key == "group") { arity(1); cfg.group = w[0]; }
    else if (key == "latency") {
      if (w[0] == "lognormal") {
        arity(4);
        cfg.latency.kind = LatencySpec::Kind::lognormal;
        cfg.latency.u = to_double(w[1], line);
        cfg.latency.s = to_double(w[2], line);
        cfg.latency.unit_ms = to_double(w[3], line);
      }
      else if (w[0] == "fixed") {
        arity(2);
        cfg.latency.kind = LatencySpec::Kind::fixed;
        cfg.latency.fixed_ms = to_double(w[1], line);
      }
      else bad(line, "latency must be lognormal or fixed");
    }
    else if (key == "loss") {
      if (w[0] == "none") {
        arity(1);
        cfg.uplink_loss = {};
      }
      else if (w[0] == "bernoulli") {
        arity(2);
        cfg.uplink_loss.kind = LossSpec::Kind::bernoulli;
        cfg.uplink_loss.p = to_double(w[1], line);
      }
      else if (w[0] == "gilbert_elliott") {
        arity(5);
        cfg.uplink_loss.kind = LossSpec::Kind::gilbert_elliott;
        cfg.uplink_loss.ge = {to_double(w[1], line), to_double(w[2], line), to_double(w[3], line),
                              to_double(w[4], line)};
      }
      else bad(line, "loss must be none, bernoulli or gilbert_elliott");
    }
    else if (key == "broadcast_loss") { arity(1); cfg.broadcast_loss = to_bool(w[0], line); }
    else if (key == "adversary") {
      arity(2);
      cfg.adversaries.push_back(
          {static_cast<PlayerId>(to_uint(w[0], line)), parse_strategy(w[1])});
    }
    else if (key == "rotation") {
      arity(1);
      if (w[0] == "fixed") cfg.rotation = Rotation::fixed_aggregator;
      else if (w[0] == "round_robin") cfg.rotation = Rotation::round_robin;
      else bad(line, "rotation must be fixed or round_robin");
    }
    else if (key == "deadline_ms") { arity(1); cfg.deadline_ms = to_double(w[0], line); }
    else if (key == "seed") { arity(1); cfg.seed = to_uint(w[0], line); }
    else if (key == "packet_bytes") { arity(1); cfg.packet_bytes = to_uint(w[0], line); }
    else if (key == "correspondents") {
      arity(2);
      cfg.correspondent_a = static_cast<PlayerId>(to_uint(w[0], line));
      cfg.correspondent_b = static_cast<PlayerId>(to_uint(w[1], line));
    }
    else if (key == "speak_probability") { arity(1); cfg.speak_probability = to_double(w[0], line); }
    else if (key == "payload_bytes") { arity(1); cfg.payload_bytes = to_uint(w[0], line); }
    else if (key == "max_missing") { arity(1); cfg.max_missing = to_uint(w[0], line); }
    else if (key == "audit_delay_ms") { arity(1); cfg.audit_delay_ms = to_double(w[0], line); }
    else if (key == "record_events") { arity(1); cfg.record_events = to_bool(w[0], line); }
    else bad(line, "unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

SimConfig read_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::io_error, "cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::string format_scenario(const SimConfig& cfg)
{
  std::ostringstream out;
  out << "id = " << cfg.id << '\n'
      << "players = " << cfg.players << '\n'
      << "rounds = " << cfg.rounds << '\n'
      << "rate_hz = " << fmt(cfg.rate_hz) << '\n'
      << "protocol = " << static_cast<int>(cfg.protocol.level) << '\n'
      << "variant = " << to_string(cfg.protocol.variant) << '\n'
      << "group = " << cfg.group << '\n';
  if (cfg.latency.kind == LatencySpec::Kind::lognormal)
    out << "latency = lognormal " << fmt(cfg.latency.u) << ' ' << fmt(cfg.latency.s) << ' '
        << fmt(cfg.latency.unit_ms) << '\n';
  else
    out << "latency = fixed " << fmt(cfg.latency.fixed_ms) << '\n';
  switch (cfg.uplink_loss.kind) {
  case LossSpec::Kind::none: out << "loss = none\n"; break;
  case LossSpec::Kind::bernoulli: out << "loss = bernoulli " << fmt(cfg.uplink_loss.p) << '\n'; break;
  case LossSpec::Kind::gilbert_elliott: {
    const auto& ge = cfg.uplink_loss.ge;
    out << "loss = gilbert_elliott " << fmt(ge.p_good_to_bad) << ' ' << fmt(ge.p_bad_to_good) << ' '
        << fmt(ge.loss_good) << ' ' << fmt(ge.loss_bad) << '\n';
    break;
  }
  }
  out << "broadcast_loss = " << (cfg.broadcast_loss ? "true" : "false") << '\n';
  for (const auto& adv : cfg.adversaries)
    out << "adversary = " << adv.player << ' ' << to_string(adv.strategy) << '\n';
  out << "rotation = " << (cfg.rotation == Rotation::round_robin ? "round_robin" : "fixed") << '\n'
      << "deadline_ms = " << fmt(cfg.deadline_ms) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "packet_bytes = " << cfg.packet_bytes << '\n'
      << "correspondents = " << cfg.correspondent_a << ' ' << cfg.correspondent_b << '\n'
      << "speak_probability = " << fmt(cfg.speak_probability) << '\n'
      << "payload_bytes = " << cfg.payload_bytes << '\n'
      << "max_missing = " << cfg.max_missing << '\n'
      << "audit_delay_ms = " << fmt(cfg.audit_delay_ms) << '\n'
      << "record_events = " << (cfg.record_events ? "true" : "false") << '\n';
  return out.str();
}

} // namespace dcnet
