#include "inducta/closure.hpp"

#include <algorithm>

namespace inducta {

MsgSet::MsgSet(std::initializer_list<Msg> xs) {
  for (const auto& x : xs) insert(x);
}

bool MsgSet::insert(const Msg& x) {
  auto it = std::lower_bound(items_.begin(), items_.end(), x);
  if (it != items_.end() && *it == x) return false;
  items_.insert(it, x);
  return true;
}

void MsgSet::insert_all(const MsgSet& other) {
  std::vector<Msg> merged;
  merged.reserve(items_.size() + other.items_.size());
  std::set_union(items_.begin(), items_.end(), other.items_.begin(), other.items_.end(),
                 std::back_inserter(merged));
  items_ = std::move(merged);
}

bool MsgSet::erase(const Msg& x) {
  auto it = std::lower_bound(items_.begin(), items_.end(), x);
  if (it == items_.end() || !(*it == x)) return false;
  items_.erase(it);
  return true;
}

bool MsgSet::contains(const Msg& x) const {
  return std::binary_search(items_.begin(), items_.end(), x);
}

bool MsgSet::subset_of(const MsgSet& other) const {
  return std::includes(other.items_.begin(), other.items_.end(), items_.begin(), items_.end());
}

MsgSet set_union(const MsgSet& a, const MsgSet& b) {
  MsgSet out = a;
  out.insert_all(b);
  return out;
}

void parts_insert(MsgSet& closed, const Msg& x) {
  std::vector<Msg> work{x};
  while (!work.empty()) {
    Msg m = std::move(work.back());
    work.pop_back();
    if (!closed.insert(m)) continue;
    switch (m.kind()) {
      case MsgKind::MPair:
        work.push_back(m.first());
        work.push_back(m.second());
        break;
      case MsgKind::Crypt: work.push_back(m.body()); break;
      default: break;
    }
  }
}

MsgSet parts(const MsgSet& h) {
  MsgSet out;
  for (const auto& x : h) parts_insert(out, x);
  return out;
}

AnalzSet::AnalzSet(const MsgSet& h) {
  for (const auto& x : h) insert(x);
}

void AnalzSet::insert(const Msg& x) {
  std::vector<Msg> work{x};
  while (!work.empty()) {
    Msg m = std::move(work.back());
    work.pop_back();
    if (!items_.insert(m)) continue;
    switch (m.kind()) {
      case MsgKind::MPair:
        work.push_back(m.first());
        work.push_back(m.second());
        break;
      case MsgKind::Crypt:
        if (items_.contains(Msg::key(inv_key(m.as_key()))))
          work.push_back(m.body());
        else
          locked_.push_back(m);
        break;
      case MsgKind::Key: {
        // A new key may open encryptions seen earlier.
        auto opens = [&](const Msg& c) { return inv_key(c.as_key()) == m.as_key(); };
        for (const auto& c : locked_)
          if (opens(c)) work.push_back(c.body());
        std::erase_if(locked_, opens);
        break;
      }
      default: break;
    }
  }
}

MsgSet analz(const MsgSet& h) { return AnalzSet(h).items(); }

MsgSet analz_with(const std::set<KeyId>& extra, const MsgSet& h) {
  AnalzSet a(h);
  for (const auto& k : extra) a.insert(Msg::key(k));
  return a.items();
}

std::set<KeyId> keys_for(const MsgSet& h) {
  std::set<KeyId> out;
  for (const auto& x : h)
    if (x.is(MsgKind::Crypt)) out.insert(inv_key(x.as_key()));
  return out;
}

bool synthesizable(const Msg& x, const MsgSet& h, HashRule rule) {
  switch (x.kind()) {
    case MsgKind::Agent:
    case MsgKind::Number: return true;
    case MsgKind::Nonce:
    case MsgKind::Key: return h.contains(x);
    case MsgKind::MPair:
      if (h.contains(x)) return true;
      return synthesizable(x.first(), h, rule) && synthesizable(x.second(), h, rule);
    case MsgKind::Hash:
      if (h.contains(x)) return true;
      return rule == HashRule::Strong ? synthesizable(x.body(), h, rule) : h.contains(x.body());
    case MsgKind::Crypt:
      if (h.contains(x)) return true;
      return h.contains(Msg::key(x.as_key())) && synthesizable(x.body(), h, rule);
  }
  return false;
}

}  // namespace inducta
