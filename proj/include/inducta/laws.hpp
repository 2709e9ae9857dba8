#pragma once

// Randomized check of the algebraic laws of parts, analz, synth and keysFor against
// naive reference implementations.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "inducta/closure.hpp"

namespace inducta {

/// Reference closures: apply one-step rules to the whole set until nothing changes.
namespace naive {
MsgSet parts(const MsgSet& h);
MsgSet analz(const MsgSet& h);
/// Membership in synth(h) decided by saturating over the subterms of x.
bool synthesizable(const Msg& x, const MsgSet& h, HashRule rule = HashRule::Strong);
}  // namespace naive

struct LawConfig {
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  std::size_t max_messages = 8;
  std::uint32_t max_depth = 4;
  HashRule rule = HashRule::Strong;
};

struct LawFailure {
  std::string law;
  std::size_t sample = 0;
  std::string detail;
};

struct LawReport {
  std::size_t samples = 0;
  std::size_t checks = 0;
  std::vector<std::string> laws;  // every law exercised
  std::vector<LawFailure> failures;
  bool ok() const { return failures.empty(); }
};

/// Random message over a small fixed vocabulary, depth at most max_depth.
Msg random_msg(std::mt19937_64& rng, std::uint32_t max_depth);
MsgSet random_set(std::mt19937_64& rng, std::size_t max_messages, std::uint32_t max_depth);

LawReport run_laws(const LawConfig& cfg);

}  // namespace inducta
