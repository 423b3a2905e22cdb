#pragma once

#include <filesystem>
#include <string>

#include "dcnet/netsim.hpp"

namespace dcnet {

// Scenario files are `key = value` lines; `#` starts a comment. Keys:
//
//   id, players, rounds, rate_hz, protocol (1-4), variant (list | no-list | optimistic),
//   group (toy | p256 | generate:<bits> | <path>),
//   latency (lognormal <u> <s> <unit_ms> | fixed <ms>),
//   loss (none | bernoulli <p> | gilbert_elliott <p_gb> <p_bg> <e_good> <e_bad>),
//   broadcast_loss (true | false), adversary (<player> <strategy>, repeatable),
//   rotation (fixed | round_robin), deadline_ms, seed, packet_bytes,
//   correspondents (<a> <b>), speak_probability, payload_bytes, max_missing,
//   audit_delay_ms, record_events (true | false)
//
// Unset keys keep the SimConfig defaults.

SimConfig parse_scenario(const std::string& text);
SimConfig read_scenario(const std::filesystem::path& path);
std::string format_scenario(const SimConfig& cfg);

Level parse_level(const std::string& text);
Variant parse_variant(const std::string& text);
const char* to_string(Variant v) noexcept;

} // namespace dcnet
