#pragma once

// Bounded enumeration of a protocol's traces: property search, possibility runs and
// replay of stored traces.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inducta/intruder.hpp"
#include "inducta/property.hpp"
#include "inducta/syntax.hpp"

namespace inducta {

struct ExploreConfig {
  std::uint32_t max_events = 8;
  Population pop;
  SpyBudget budget;
  /// Prune duplicate events and interleavings that only reorder independent steps.
  bool dedupe = true;
  unsigned jobs = 1;             // worker threads; 0 = hardware concurrency
  std::uint64_t max_states = 0;  // 0 = unlimited; exceeding it truncates the search
  HashRule hash_rule = HashRule::Strong;
  bool no_oops = false;
  /// Extra properties checked on every explored trace without stopping the search.
  std::vector<PropertySpec> monitors;
};

struct MonitorFailure {
  std::string property;
  std::string detail;
  AnnotatedTrace trace;
};

struct Verdict {
  enum class Kind : std::uint8_t { NoViolation, Counterexample };
  Kind kind = Kind::NoViolation;
  std::uint32_t bound = 0;
  std::uint64_t traces_explored = 0;
  bool truncated = false;

  // Counterexample only.
  AnnotatedTrace counterexample;
  Binding binding;
  std::string detail;

  std::uint64_t monitor_failures = 0;
  std::optional<MonitorFailure> first_monitor_failure;

  bool holds() const { return kind == Kind::NoViolation; }
};

/// Every single-event extension of evs: honest rule firings (Oops unless disabled) and
/// Says Spy B X for each fake candidate X and B ≠ Spy.
std::vector<Trace> successors(const Trace& evs, const Protocol& proto, const ExploreConfig& cfg);

/// Searches all traces of at most cfg.max_events events, shortest first, for a violation.
Verdict explore(const Protocol& proto, const ExploreConfig& cfg, const PropertySpec& prop);

/// A trace built from honest rule firings only whose newest event matches goal[0] and in
/// which goal[1..] all match (with consistent bindings). A non-empty final_rule also
/// requires the newest event to come from that rule.
std::optional<AnnotatedTrace> find_run(const Protocol& proto, const std::vector<EventPattern>& goal,
                                       const ExploreConfig& cfg, const std::string& final_rule = {});

struct ReplayResult {
  bool ok = true;
  std::size_t failed_index = 0;  // oldest-first index of the first non-derivable event
  std::string reason;
  std::vector<EventNote> notes;  // rule (or Fake) deriving each accepted event
};

/// Checks that each event, oldest first, is derivable from its prefix by a protocol rule
/// or by the spy's Fake rule.
ReplayResult replay(const Trace& evs, const Protocol& proto, const ExploreConfig& cfg);

}  // namespace inducta
