#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "dcnet/group.hpp"

namespace dcnet {

enum class AdversaryKnowledge : std::uint8_t {
  transcript, // packets, commitments and broadcasts
  keys,       // transcript plus every player's key pair
};

struct PrivacyOptions {
  std::size_t trials = 10000;
  std::size_t players = 5;
  std::size_t corrupted = 0; // players 1..corrupted collude with the aggregator
  std::string group = "toy";
  std::uint64_t seed = 1;
  AdversaryKnowledge knowledge = AdversaryKnowledge::transcript;
};

struct PrivacyReport {
  std::size_t trials = 0;
  std::size_t correct = 0;
  std::size_t honest = 0; // |H|
  std::size_t pairs = 0;  // |H|(|H|-1)/2
  double chance = 0;      // 1 / pairs
  double accuracy = 0;
  double sigma = 0;       // binomial standard deviation of the accuracy at chance
  double z = 0;           // (accuracy - chance) / sigma
  std::size_t rejected = 0; // packets the aggregator refused; expected 0
};

/// Each trial runs a fresh one-round level-3 setup with a uniformly random
/// honest pair speaking nonzero messages, then lets the adversary guess the
/// pair from what it observed.
PrivacyReport run_privacy_experiment(const PrivacyOptions& options);

struct HomogeneityTest {
  std::size_t trials = 0;
  double statistic = 0;
  double dof = 0;
  double p_value = 0;
};

/// Two-sample chi-square test comparing the (O, s) pairs a bystander sends
/// with those of a correspondent carrying `message`, each trial on a fresh
/// setup. The group must be small enough to tabulate every pair.
HomogeneityTest opening_homogeneity(const GroupParams& base, const Scalar& message,
                                    std::size_t trials, std::uint64_t seed);

} // namespace dcnet
