#pragma once

// Closures over finite message sets: parts, analz, keysFor and membership in synth.

#include <initializer_list>
#include <set>
#include <vector>

#include "inducta/term.hpp"

namespace inducta {

/// Finite set of messages iterated in canonical order.
class MsgSet {
 public:
  using const_iterator = std::vector<Msg>::const_iterator;

  MsgSet() = default;
  MsgSet(std::initializer_list<Msg> xs);
  template <typename It>
  MsgSet(It first, It last) {
    for (; first != last; ++first) insert(*first);
  }

  /// Returns true when x was not already present.
  bool insert(const Msg& x);
  void insert_all(const MsgSet& other);
  bool erase(const Msg& x);
  bool contains(const Msg& x) const;

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const_iterator begin() const { return items_.begin(); }
  const_iterator end() const { return items_.end(); }
  const std::vector<Msg>& items() const { return items_; }

  bool subset_of(const MsgSet& other) const;

  friend bool operator==(const MsgSet&, const MsgSet&) = default;

 private:
  std::vector<Msg> items_;  // sorted, unique
};

MsgSet set_union(const MsgSet& a, const MsgSet& b);

/// How the spy may produce hashes. Strong: Hash X whenever X is synthesizable.
/// StrictPaper: Hash X only from X already held (the literal inductive rule).
enum class HashRule { Strong, StrictPaper };

/// Components of compound messages and bodies of encryptions, to saturation.
MsgSet parts(const MsgSet& h);

/// What can be learnt without breaking ciphers: projections plus decryption under held inverse keys.
MsgSet analz(const MsgSet& h);

/// analz({Key k | k in extra} ∪ h)
MsgSet analz_with(const std::set<KeyId>& extra, const MsgSet& h);

/// {inv_key(K) | Crypt K X ∈ h}; over h itself, not a closure of it.
std::set<KeyId> keys_for(const MsgSet& h);

/// Membership in synth(h).
bool synthesizable(const Msg& x, const MsgSet& h, HashRule rule = HashRule::Strong);

/// Incrementally maintained analz closure. Insertion keeps the set closed and
/// remembers encryptions whose inverse key is not yet known.
class AnalzSet {
 public:
  AnalzSet() = default;
  explicit AnalzSet(const MsgSet& h);

  void insert(const Msg& x);
  const MsgSet& items() const { return items_; }
  bool contains(const Msg& x) const { return items_.contains(x); }

 private:
  MsgSet items_;
  std::vector<Msg> locked_;  // Crypt terms still awaiting their key
};

/// Incrementally maintained parts closure.
void parts_insert(MsgSet& closed, const Msg& x);

}  // namespace inducta
