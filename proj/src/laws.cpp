#include "inducta/laws.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace inducta {

namespace naive {

namespace {

template <typename Step>
MsgSet saturate(MsgSet h, Step step) {
  for (;;) {
    MsgSet next = h;
    for (const auto& x : h) step(x, h, next);
    if (next == h) return h;
    h = std::move(next);
  }
}

}  // namespace

MsgSet parts(const MsgSet& h) {
  return saturate(h, [](const Msg& x, const MsgSet&, MsgSet& next) {
    if (x.is(MsgKind::MPair)) {
      next.insert(x.first());
      next.insert(x.second());
    } else if (x.is(MsgKind::Crypt)) {
      next.insert(x.body());
    }
  });
}

MsgSet analz(const MsgSet& h) {
  return saturate(h, [](const Msg& x, const MsgSet& cur, MsgSet& next) {
    if (x.is(MsgKind::MPair)) {
      next.insert(x.first());
      next.insert(x.second());
    } else if (x.is(MsgKind::Crypt) && cur.contains(Msg::key(inv_key(x.as_key())))) {
      next.insert(x.body());
    }
  });
}

bool synthesizable(const Msg& x, const MsgSet& h, HashRule rule) {
  MsgSet universe;
  std::function<void(const Msg&)> sub = [&](const Msg& m) {
    universe.insert(m);
    switch (m.kind()) {
      case MsgKind::MPair: sub(m.first()); sub(m.second()); break;
      case MsgKind::Hash:
      case MsgKind::Crypt: sub(m.body()); break;
      default: break;
    }
  };
  sub(x);
  MsgSet in;
  for (;;) {
    bool grew = false;
    for (const auto& m : universe) {
      if (in.contains(m)) continue;
      bool ok = h.contains(m);
      switch (m.kind()) {
        case MsgKind::Agent:
        case MsgKind::Number: ok = true; break;
        case MsgKind::MPair: ok = ok || (in.contains(m.first()) && in.contains(m.second())); break;
        case MsgKind::Hash:
          ok = ok || (rule == HashRule::Strong ? in.contains(m.body()) : h.contains(m.body()));
          break;
        case MsgKind::Crypt: ok = ok || (in.contains(m.body()) && h.contains(Msg::key(m.as_key()))); break;
        default: break;
      }
      if (ok) grew = in.insert(m) || grew;
    }
    if (!grew) return in.contains(x);
  }
}

}  // namespace naive

namespace {

const std::vector<AgentId>& vocab_agents() {
  static const std::vector<AgentId> v{AgentId::server(), AgentId::friend_(1), AgentId::friend_(2),
                                      AgentId::spy()};
  return v;
}

const std::vector<KeyId>& vocab_keys() {
  static const std::vector<KeyId> v{KeyId::shared(AgentId::friend_(1)), KeyId::shared(AgentId::spy()),
                                    KeyId::pub(AgentId::friend_(2)),    KeyId::priv(AgentId::friend_(2)),
                                    KeyId::session(0),                  KeyId::session(1)};
  return v;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& xs) {
  return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

bool subset(const MsgSet& a, const MsgSet& b) { return a.subset_of(b); }

MsgSet with(MsgSet h, std::initializer_list<Msg> xs) {
  for (const auto& x : xs) h.insert(x);
  return h;
}

std::set<KeyId> keys_of(const MsgSet& h) {
  std::set<KeyId> out;
  for (const auto& m : h)
    if (m.is(MsgKind::Crypt)) out.insert(inv_key(m.as_key()));
  return out;
}

// A term assembled from components of `base` and keys, so that roughly half are synthesizable.
Msg witness(std::mt19937_64& rng, const MsgSet& base, std::uint32_t depth) {
  std::uniform_int_distribution<int> d(0, 9);
  int c = d(rng);
  if (depth <= 1 || c < 4) {
    if (!base.empty() && c < 3) return pick(rng, base.items());
    return random_msg(rng, 1);
  }
  switch (c) {
    case 4:
    case 5:
    case 6: return Msg::mpair(witness(rng, base, depth - 1), witness(rng, base, depth - 1));
    case 7: return Msg::hash(witness(rng, base, depth - 1));
    default: return Msg::crypt(pick(rng, vocab_keys()), witness(rng, base, depth - 1));
  }
}

}  // namespace

Msg random_msg(std::mt19937_64& rng, std::uint32_t max_depth) {
  std::uniform_int_distribution<int> d(0, 9);
  int c = d(rng);
  if (max_depth <= 1 || c < 4) {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0: return Msg::agent(pick(rng, vocab_agents()));
      case 1: return Msg::nonce(std::uniform_int_distribution<std::uint64_t>(0, 3)(rng));
      case 2: return Msg::key(pick(rng, vocab_keys()));
      default: return Msg::number(std::uniform_int_distribution<std::uint64_t>(0, 1)(rng));
    }
  }
  switch (c) {
    case 4:
    case 5:
    case 6: return Msg::mpair(random_msg(rng, max_depth - 1), random_msg(rng, max_depth - 1));
    case 7: return Msg::hash(random_msg(rng, max_depth - 1));
    default: return Msg::crypt(pick(rng, vocab_keys()), random_msg(rng, max_depth - 1));
  }
}

MsgSet random_set(std::mt19937_64& rng, std::size_t max_messages, std::uint32_t max_depth) {
  MsgSet h;
  std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_messages)(rng);
  while (h.size() < n) h.insert(random_msg(rng, max_depth));
  return h;
}

LawReport run_laws(const LawConfig& cfg) {
  LawReport rep;
  std::mt19937_64 rng(cfg.seed);
  std::map<std::string, bool> seen;
  std::size_t sample = 0;

  auto law = [&](const std::string& name, bool ok, const std::string& detail = {}) {
    if (!seen.count(name)) {
      seen[name] = true;
      rep.laws.push_back(name);
    }
    ++rep.checks;
    if (!ok) rep.failures.push_back(LawFailure{name, sample, detail});
  };

  const HashRule hr = cfg.rule;
  for (sample = 0; sample < cfg.samples; ++sample) {
    const MsgSet h = random_set(rng, cfg.max_messages, cfg.max_depth);
    const MsgSet h2 = random_set(rng, cfg.max_messages, cfg.max_depth);
    MsgSet g;
    for (const auto& x : h)
      if (rng() % 2) g.insert(x);

    const MsgSet ph = parts(h), ah = analz(h), pg = parts(g), ag = analz(g);

    law("oracle: parts", ph == naive::parts(h));
    law("oracle: analz", ah == naive::analz(h));
    law("oracle: parts (subset)", pg == naive::parts(g));
    law("oracle: analz (subset)", ag == naive::analz(g));

    law("monotone: parts", subset(pg, ph));
    law("monotone: analz", subset(ag, ah));
    law("idempotent: parts", parts(ph) == ph);
    law("idempotent: analz", analz(ah) == ah);
    law("parts(analz H) = parts H", parts(ah) == ph);
    law("analz(parts H) = parts H", analz(ph) == ph);
    law("analz H ⊆ parts H", subset(ah, ph));
    const MsgSet u = set_union(h, h2);
    law("parts(G ∪ H) = parts G ∪ parts H", parts(u) == set_union(ph, parts(h2)));
    law("analz G ∪ analz H ⊆ analz(G ∪ H)", subset(set_union(ah, analz(h2)), analz(u)));
    law("analz_with(∅, H) = analz H", analz_with({}, h) == ah);

    std::set<KeyId> kf;
    for (const auto& m : h)
      if (m.is(MsgKind::Crypt)) kf.insert(inv_key(m.as_key()));
    law("keysFor H = {K⁻¹ | Crypt K X ∈ H}", keys_for(h) == kf);

    for (int w = 0; w < 6; ++w) {
      const Msg x = witness(rng, w % 2 ? ah : h, cfg.max_depth);
      const bool sx = synthesizable(x, h, hr);
      law("oracle: synth", sx == naive::synthesizable(x, h, hr));
      law("oracle: synth (analz)", synthesizable(x, ah, hr) == naive::synthesizable(x, ah, hr));
      if (synthesizable(x, g, hr)) law("monotone: synth", sx);
      if (sx) {
        bool bounded = true;
        for (const auto& y : parts(with(h, {x})))
          if (!ph.contains(y) && !synthesizable(y, h, hr)) bounded = false;
        law("parts(synth H) ⊆ parts H ∪ synth H", bounded);
        bool abounded = true;
        for (const auto& y : analz(with(h, {x})))
          if (!ah.contains(y) && !synthesizable(y, h, hr)) abounded = false;
        law("analz(synth H) ⊆ analz H ∪ synth H", abounded);
      }
      if (synthesizable(x, ah, hr)) {
        bool bounded = true;
        for (const auto& y : parts(with(h, {x})))
          if (!ph.contains(y) && !synthesizable(y, ah, hr)) bounded = false;
        law("X ∈ synth(analz H) ⇒ parts({X} ∪ H) ⊆ synth(analz H) ∪ parts H", bounded);
      }
      if (x.is(MsgKind::MPair))
        law("{X,Y} ∈ synth(analz H) ⇔ X, Y ∈ synth(analz H)",
            synthesizable(x, ah, hr) ==
                (synthesizable(x.first(), ah, hr) && synthesizable(x.second(), ah, hr)));

      // Symbolic evaluation of parts and analz on insert.
      const MsgSet pxh = parts(with(h, {x}));
      switch (x.kind()) {
        case MsgKind::Agent:
        case MsgKind::Nonce:
        case MsgKind::Key:
        case MsgKind::Number:
        case MsgKind::Hash:
          law("parts(insert atom/Hash H) = insert X (parts H)", pxh == with(ph, {x}));
          break;
        case MsgKind::MPair:
          law("parts(insert {X,Y} H) = insert {X,Y} (parts(insert X (insert Y H)))",
              pxh == with(parts(with(h, {x.first(), x.second()})), {x}));
          law("analz(insert {X,Y} H) = insert {X,Y} (analz(insert X (insert Y H)))",
              analz(with(h, {x})) == with(analz(with(h, {x.first(), x.second()})), {x}));
          break;
        case MsgKind::Crypt: {
          law("parts(insert (Crypt K X) H) = insert (Crypt K X) (parts(insert X H))",
              pxh == with(parts(with(h, {x.body()})), {x}));
          const MsgSet expect = ah.contains(Msg::key(inv_key(x.as_key())))
                                    ? with(analz(with(h, {x.body()})), {x})
                                    : with(ah, {x});
          law("analz(insert (Crypt K X) H) case split", analz(with(h, {x})) == expect);
          break;
        }
      }
      if (ah.contains(x)) law("X ∈ analz H ⇒ analz(insert X H) = analz H", analz(with(h, {x})) == ah);
    }

    for (const auto& k : vocab_keys()) {
      const Msg km = Msg::key(k);
      if (!keys_of(ah).contains(k))
        law("K ∉ keysFor(analz H) ⇒ analz(insert (Key K) H) = insert (Key K) (analz H)",
            analz(with(h, {km})) == with(ah, {km}));
      if (synthesizable(km, h, hr)) law("Key K ∈ synth H ⇒ Key K ∈ H", h.contains(km));
      law("analz_with({K}, H) = analz(insert (Key K) H)", analz_with({k}, h) == analz(with(h, {km})));
    }
    for (std::uint64_t n = 0; n < 4; ++n) {
      const Msg nm = Msg::nonce(n);
      if (synthesizable(nm, h, hr)) law("Nonce N ∈ synth H ⇒ Nonce N ∈ H", h.contains(nm));
    }
    law("parts ∅ = ∅", parts(MsgSet{}).empty());
  }
  rep.samples = cfg.samples;
  return rep;
}

}  // namespace inducta
