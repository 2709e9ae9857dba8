#pragma once

// Message algebra: agents, keys with inversion, and the free message datatype.

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace inducta {

struct AgentId {
  enum class Kind : std::uint8_t { Server, Friend, Spy };

  Kind kind = Kind::Server;
  std::uint32_t index = 0;  // only meaningful for Friend

  static constexpr AgentId server() { return {Kind::Server, 0}; }
  static constexpr AgentId spy() { return {Kind::Spy, 0}; }
  static constexpr AgentId friend_(std::uint32_t i) { return {Kind::Friend, i}; }

  constexpr bool is_server() const { return kind == Kind::Server; }
  constexpr bool is_spy() const { return kind == Kind::Spy; }
  constexpr bool is_friend() const { return kind == Kind::Friend; }

  friend constexpr auto operator<=>(const AgentId&, const AgentId&) = default;
};

struct KeyId {
  enum class Kind : std::uint8_t { SharedLongTerm, Public, Private, Session };

  Kind kind = Kind::Session;
  AgentId owner{};           // long-term, public and private keys
  std::uint32_t index = 0;   // session keys

  static constexpr KeyId shared(AgentId a) { return {Kind::SharedLongTerm, a, 0}; }
  static constexpr KeyId pub(AgentId a) { return {Kind::Public, a, 0}; }
  static constexpr KeyId priv(AgentId a) { return {Kind::Private, a, 0}; }
  static constexpr KeyId session(std::uint32_t i) { return {Kind::Session, AgentId{}, i}; }

  constexpr bool is_session() const { return kind == Kind::Session; }

  friend constexpr auto operator<=>(const KeyId&, const KeyId&) = default;
};

/// Inverse key: symmetric keys invert to themselves, public and private keys swap.
constexpr KeyId inv_key(KeyId k) {
  switch (k.kind) {
    case KeyId::Kind::Public: return KeyId::priv(k.owner);
    case KeyId::Kind::Private: return KeyId::pub(k.owner);
    default: return k;
  }
}

constexpr bool is_symmetric(KeyId k) { return inv_key(k) == k; }

enum class MsgKind : std::uint8_t { Agent, Number, Nonce, Key, Hash, MPair, Crypt };

/// Immutable message term. Copies share structure; equality and ordering are structural.
///
/// The ordering is total and canonical (kind first, then fields left to right), so
/// ordered containers of messages iterate identically on every run.
class Msg {
 public:
  static Msg agent(AgentId a);
  static Msg number(std::uint64_t n);
  static Msg nonce(std::uint64_t n);
  static Msg key(KeyId k);
  static Msg hash(Msg x);
  static Msg mpair(Msg x, Msg y);
  static Msg crypt(KeyId k, Msg x);

  MsgKind kind() const { return node_->kind; }
  bool is(MsgKind k) const { return node_->kind == k; }

  AgentId as_agent() const { return node_->agent; }
  std::uint64_t as_number() const { return node_->number; }  // Number and Nonce payload
  KeyId as_key() const { return node_->key; }                 // Key and Crypt key
  const Msg& first() const { return *node_->a; }              // MPair left, Hash/Crypt body
  const Msg& second() const { return *node_->b; }             // MPair right
  const Msg& body() const { return *node_->a; }

  std::size_t hash_value() const { return node_->hash; }
  std::uint32_t depth() const { return node_->depth; }
  std::uint32_t size() const { return node_->size; }

  friend bool operator==(const Msg& x, const Msg& y);
  friend std::strong_ordering operator<=>(const Msg& x, const Msg& y);

 private:
  struct Node {
    MsgKind kind;
    AgentId agent{};
    std::uint64_t number = 0;
    KeyId key{};
    std::unique_ptr<Msg> a;
    std::unique_ptr<Msg> b;
    std::size_t hash = 0;
    std::uint32_t depth = 1;
    std::uint32_t size = 1;
  };

  explicit Msg(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Msg make(Node&& n);

  std::shared_ptr<const Node> node_;
};

/// Right-nested n-ary pairing {x1, ..., xn}. A singleton yields its element.
/// Throws std::invalid_argument on an empty sequence.
Msg mpair_n(std::span<const Msg> xs);
Msg mpair_n(std::initializer_list<Msg> xs);

/// Keyed digest {hash {X, Y}, Y}.
Msg hash_pair(const Msg& x, const Msg& y);

/// Flatten a right-nested pair chain into its components.
std::vector<Msg> tuple_elements(const Msg& m);

enum class Infrastructure : std::uint8_t { SharedKey, PublicKey };

struct Population {
  std::uint32_t friends = 2;
  std::set<AgentId> bad{AgentId::spy()};
  Infrastructure infrastructure = Infrastructure::SharedKey;

  /// Friend 1..n, Spy, Server: the order in which searches try agents.
  std::vector<AgentId> agents() const;
  bool contains(AgentId a) const;
  bool is_bad(AgentId a) const { return bad.contains(a); }

  /// Throws std::invalid_argument unless Spy is bad, Server is not, and every bad agent exists.
  void validate() const;

  friend bool operator==(const Population&, const Population&) = default;
};

std::string to_string(AgentId a);
std::string to_string(KeyId k);

}  // namespace inducta

template <>
struct std::hash<inducta::Msg> {
  std::size_t operator()(const inducta::Msg& m) const noexcept { return m.hash_value(); }
};
