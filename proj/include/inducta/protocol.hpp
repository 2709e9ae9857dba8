#pragma once

// Protocols as sets of guarded trace-extension rules, the built-in models, and the
// recursive authentication server.

#include <optional>
#include <string>
#include <vector>

#include "inducta/pattern.hpp"

namespace inducta {

struct FreshDecl {
  enum class Kind : std::uint8_t { Nonce, SessionKey };
  std::string var;
  Kind kind = Kind::Nonce;
  friend bool operator==(const FreshDecl&, const FreshDecl&) = default;
};

struct Distinct {
  AgentTerm lhs, rhs;
  friend bool operator==(const Distinct&, const Distinct&) = default;
};

/// One inductive rule: if every premise event occurs in the trace (at any age), the
/// side conditions hold and the fresh values are unused, the produced event may be added.
struct Rule {
  enum class Action : std::uint8_t {
    Emit,           // produce the instantiated event
    ServerRespond,  // premise binds an opaque request; the response comes from respond()
  };

  std::string name;
  std::vector<EventPattern> premises;
  std::vector<FreshDecl> fresh;
  std::vector<Distinct> distinct;
  EventPattern produces;
  Action action = Action::Emit;
  bool is_oops = false;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Protocol {
  std::string name;
  Infrastructure infrastructure = Infrastructure::SharedKey;
  std::vector<Rule> rules;  // Nil and Fake are implicit

  bool has_oops() const;
  bool server_recursive() const;
  const Rule* find_rule(const std::string& name) const;
  /// Copy with the Oops rule removed.
  Protocol without_oops() const;

  friend bool operator==(const Protocol&, const Protocol&) = default;
};

/// The recursive authentication server as a rule: on any request Says B' Server PB it
/// answers Says Server B RB for each (PB, RB, K) in respond().
Rule server_respond_rule(const std::string& name = "RA3");

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();

/// Throws std::invalid_argument for an unknown name.
Protocol builtin(const std::string& name);

/// A rule instance: its bindings and the event it adds.
struct Firing {
  Binding binding;
  Event event;
  std::vector<Msg> fresh;  // values allocated for the rule's fresh declarations
};

/// Everything a rule needs to know about the current trace.
struct TraceView {
  const std::vector<Event>& events;
  const MsgSet& used;
  const Population& pop;
};

std::vector<Firing> fireable(const Rule& rule, const TraceView& view);
std::vector<Firing> fireable(const Rule& rule, const Trace& evs, const Population& pop);
/// Firings completing a binding under which every premise already matches.
std::vector<Firing> fire_from(const Rule& rule, const Binding& matched, const TraceView& view);

/// (request, response, newest session key) produced by the recursive server.
struct RespondTriple {
  Msg request;
  Msg response;
  KeyId key;
  friend bool operator==(const RespondTriple&, const RespondTriple&) = default;
};

/// The server's response to a request, with session keys drawn fresh from `used` in
/// innermost-first order. Empty when the request is ill-formed or a digest fails to verify.
std::vector<RespondTriple> respond(const MsgSet& used, const Msg& request);
std::vector<RespondTriple> respond(const Trace& evs, const Population& pop, const Msg& request);

/// Coarse response model: the end token, or {Crypt(shrK B){Key K, Agent A, Nonce N}, R'}
/// with K unused and R' again a member.
bool responses_member(const Msg& r, const MsgSet& used);
bool responses_member(const Msg& r, const Trace& evs, const Population& pop);

/// The end-of-requests token of the recursive protocol.
Msg end_token();

/// Certificates Crypt(shrK A){Key K, Agent B, N} found in parts{r}.
struct Certificate {
  AgentId holder;
  KeyId key;
  AgentId peer;
  Msg nonce;
};
std::vector<Certificate> certificates(const Msg& r);

}  // namespace inducta
