#pragma once

// Message and event templates with typed variables, structural matching and substitution.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "inducta/trace.hpp"

namespace inducta {

enum class Sort : std::uint8_t { Agent, Nonce, Key, Opaque };

const char* to_string(Sort s);

/// Variable assignment. Agent variables bind Agent messages, nonce variables Nonce
/// messages, key variables Key messages, opaque variables anything.
class Binding {
 public:
  const Msg* find(const std::string& name) const;
  bool bound(const std::string& name) const { return find(name) != nullptr; }
  /// Binds name, or checks consistency with an existing binding.
  bool unify(const std::string& name, const Msg& value);
  void set(const std::string& name, Msg value);

  std::optional<AgentId> agent(const std::string& name) const;

  const std::vector<std::pair<std::string, Msg>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const Binding&, const Binding&) = default;

 private:
  std::vector<std::pair<std::string, Msg>> entries_;
};

/// An agent position: either a constant or an agent variable.
struct AgentTerm {
  std::string var;  // empty for a constant
  AgentId value{};

  static AgentTerm variable(std::string name) { return {std::move(name), {}}; }
  static AgentTerm constant(AgentId a) { return {{}, a}; }
  bool is_var() const { return !var.empty(); }

  std::optional<AgentId> resolve(const Binding& b) const;
  friend bool operator==(const AgentTerm&, const AgentTerm&) = default;
};

/// A key position: a key variable, a long-term key of some agent term, or a constant key.
struct KeyTerm {
  enum class Kind : std::uint8_t { Var, Shared, Public, Private, Literal };
  Kind kind = Kind::Literal;
  std::string var;  // Var
  AgentTerm owner;  // Shared, Public, Private
  KeyId literal{};  // Literal

  static KeyTerm variable(std::string name) { return {Kind::Var, std::move(name), {}, {}}; }
  static KeyTerm shared(AgentTerm a) { return {Kind::Shared, {}, std::move(a), {}}; }
  static KeyTerm pub(AgentTerm a) { return {Kind::Public, {}, std::move(a), {}}; }
  static KeyTerm priv(AgentTerm a) { return {Kind::Private, {}, std::move(a), {}}; }
  static KeyTerm constant(KeyId k) { return {Kind::Literal, {}, {}, k}; }

  std::optional<KeyId> resolve(const Binding& b) const;
  bool match(KeyId k, Binding& b) const;
  friend bool operator==(const KeyTerm&, const KeyTerm&) = default;
};

/// Msg-shaped template.
class Pattern {
 public:
  enum class Kind : std::uint8_t { Literal, Var, AgentRef, KeyRef, MPair, Hash, Crypt };

  static Pattern literal(Msg m);
  static Pattern var(std::string name, Sort sort);
  static Pattern agent(AgentTerm a);
  static Pattern key(KeyTerm k);
  static Pattern mpair(Pattern x, Pattern y);
  static Pattern tuple(std::vector<Pattern> xs);
  static Pattern hash(Pattern x);
  static Pattern crypt(KeyTerm k, Pattern x);
  /// {hash {X, Y}, Y}
  static Pattern hash_pair(Pattern x, Pattern y);

  Kind kind() const { return node_->kind; }
  const Msg& literal_value() const { return *node_->lit; }
  const std::string& var_name() const { return node_->name; }
  Sort var_sort() const { return node_->sort; }
  const AgentTerm& agent_term() const { return node_->agent; }
  const KeyTerm& key_term() const { return node_->key; }
  const Pattern& first() const { return *node_->a; }
  const Pattern& second() const { return *node_->b; }

  /// Extends b so that this pattern instantiates to m. On failure b is left unspecified.
  bool match(const Msg& m, Binding& b) const;
  /// Ground instance; nullopt if some variable is unbound.
  std::optional<Msg> substitute(const Binding& b) const;

  /// Every variable occurrence, in left-to-right order, with duplicates.
  void collect_vars(std::vector<std::pair<std::string, Sort>>& out) const;
  std::uint32_t depth() const;
  /// Copy with every occurrence of variable `from` (including agent and key positions)
  /// renamed to `to`.
  Pattern rename(const std::string& from, const std::string& to) const;

  friend bool operator==(const Pattern& x, const Pattern& y);

 private:
  struct Node {
    Kind kind;
    std::optional<Msg> lit;
    std::string name;
    Sort sort = Sort::Opaque;
    AgentTerm agent;
    KeyTerm key;
    std::shared_ptr<const Pattern> a, b;
  };
  explicit Pattern(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct EventPattern {
  Event::Kind kind = Event::Kind::Says;
  AgentTerm sender;
  AgentTerm receiver;         // unused for Notes
  Pattern body = Pattern::literal(Msg::agent(AgentId::server()));
  bool unknown_sender = false;  // written ?A' in protocol files: the receiver cannot tell who sent it

  static EventPattern says(AgentTerm a, AgentTerm b, Pattern x, bool unknown = false) {
    return {Event::Kind::Says, std::move(a), std::move(b), std::move(x), unknown};
  }
  static EventPattern notes(AgentTerm a, Pattern x) {
    return {Event::Kind::Notes, std::move(a), AgentTerm{}, std::move(x), false};
  }

  bool match(const Event& ev, Binding& b) const;
  std::optional<Event> substitute(const Binding& b) const;
  void collect_vars(std::vector<std::pair<std::string, Sort>>& out) const;

  friend bool operator==(const EventPattern&, const EventPattern&) = default;
};

/// All extensions of `seed` under which every pattern matches some event of `events`.
std::vector<Binding> match_all(const std::vector<EventPattern>& pats,
                               const std::vector<Event>& events, const Binding& seed = {});

}  // namespace inducta
