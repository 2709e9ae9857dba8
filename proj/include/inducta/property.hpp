#pragma once

// Decidable per-trace versions of secrecy, agreement, unicity and regularity theorems,
// plus the fixed lemma checks (session-key compromise, forwarding).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "inducta/protocol.hpp"

namespace inducta {

/// Facts about one trace, computed on demand.
class TraceFacts {
 public:
  TraceFacts(std::vector<Event> oldest_first, const Population& pop);
  /// Reuse an already computed analz(spies evs).
  TraceFacts(std::vector<Event> oldest_first, const Population& pop, MsgSet analz_spies);

  const std::vector<Event>& events() const { return events_; }
  const Population& pop() const { return pop_; }
  const MsgSet& spies() const;
  const MsgSet& analz_spies() const;
  const MsgSet& parts_spies() const;

 private:
  std::vector<Event> events_;
  const Population& pop_;
  mutable std::optional<MsgSet> spies_, analz_, parts_;
};

struct Secrecy {
  std::vector<EventPattern> says;     // events assumed present
  std::vector<Pattern> parts;         // messages assumed in parts(spies evs)
  std::vector<std::string> honest;    // agent variables assumed not bad
  std::vector<Pattern> no_oops;       // Notes Spy payloads assumed absent
  Pattern target = Pattern::var("_", Sort::Opaque);
};

/// Whenever every trigger event occurs (honest agents as listed), the guarantee events
/// occur too; guarantee variables not bound by the trigger are existential.
struct Agreement {
  std::vector<EventPattern> trigger;
  std::vector<std::string> honest;
  std::vector<EventPattern> guarantee;
};

/// Instances sharing the key field agree on every determined field.
struct Unicity {
  enum class Source : std::uint8_t { Parts, Events };
  Source source = Source::Parts;
  Pattern container = Pattern::var("_", Sort::Opaque);  // Parts
  EventPattern event;                                    // Events
  std::string key;
  std::vector<std::string> determined;
  std::vector<std::string> honest;  // instances are only counted when these are not bad
};

/// For every agent A of the population: item(A) ∈ parts(spies evs) ⇔ A ∈ bad.
struct Regularity {
  Pattern item = Pattern::var("_", Sort::Opaque);
  std::string agent;
};

/// Key K ∈ analz(insert (Key K') (spies evs)) ⇔ K = K' ∨ Key K ∈ analz(spies evs),
/// for all session keys K, K' of the trace.
struct SessionKeyCompromise {};

/// Whenever an event matching `event` occurs, the component bound to `var` is in analz.
struct Forwarding {
  EventPattern event;
  std::string var;
};

/// Removing the spy's Notes does not change the keys in parts(spies evs).
struct OopsForwarding {};

struct PropertySpec {
  std::string name;
  std::variant<Secrecy, Agreement, Unicity, Regularity, SessionKeyCompromise, Forwarding,
               OopsForwarding>
      body;

  /// Event patterns whose receive side the spy should try to forge (agreement triggers
  /// and secrecy assumptions written with an unknown sender).
  std::vector<EventPattern> forgeable() const;
};

/// Why a property failed on a trace.
struct Violation {
  Binding binding;
  std::string detail;
};

std::optional<Violation> check_secrecy(const TraceFacts& t, const Secrecy& s);
std::optional<Violation> check_agreement(const TraceFacts& t, const Agreement& a);
std::optional<Violation> check_unicity(const TraceFacts& t, const Unicity& u);
std::optional<Violation> check_regularity(const TraceFacts& t, const Regularity& r);
std::optional<Violation> check_session_key_compromise(const TraceFacts& t);
std::optional<Violation> check_forwarding(const TraceFacts& t, const Forwarding& f);
std::optional<Violation> check_oops_forwarding(const TraceFacts& t);

std::optional<Violation> check(const TraceFacts& t, const PropertySpec& p);
std::optional<Violation> check(const Trace& evs, const Population& pop, const PropertySpec& p);

/// Variables a spec uses without binding them; empty for a well-formed spec.
std::vector<std::string> unbound_variables(const PropertySpec& p);

/// Named properties shipped for a built-in protocol (empty for unknown names).
std::vector<PropertySpec> builtin_properties(const std::string& protocol);

/// Lemma checks applicable to a protocol: long-term key regularity, session-key
/// compromise, and for the Otway-Rees family the two forwarding lemmas.
std::vector<PropertySpec> standard_lemmas(const Protocol& proto);

/// Certificate-mate unicity on one server response: every session key occurs in at most
/// two certificates, and two certificates sharing a key are mates
/// Crypt(shrK A){K, B, N} / Crypt(shrK B){K, A, N'}.
bool certificates_mated(const Msg& response);

}  // namespace inducta
