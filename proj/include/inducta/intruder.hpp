#pragma once

// Finite, pattern-directed approximation of the spy's Fake rule.

#include <cstdint>
#include <functional>
#include <vector>

#include "inducta/protocol.hpp"

namespace inducta {

struct SpyBudget {
  std::uint32_t max_depth = 16;  // term depth cap for values placed in opaque slots
  bool use_patterns = true;      // restrict opaque slots to protocol-shaped terms
};

/// analz(spies evs)
MsgSet spy_knowledge(const Trace& evs, const Population& pop);

/// What the spy holds, indexed for instantiating receive patterns.
struct Knowledge {
  MsgSet analz;
  std::vector<Msg> nonces, keys, crypts, hashes;
  std::vector<Msg> opaque;  // candidates for opaque variables

  Knowledge(MsgSet analz_set, const std::vector<Pattern>& shapes, const SpyBudget& budget);
};

/// Compound and literal subpatterns (other than tuple tails) of every pattern in the protocol (and any extra
/// patterns): the shapes a forged opaque component could usefully take.
std::vector<Pattern> relevant_shapes(const Protocol& proto,
                                     const std::vector<EventPattern>& extra = {});

/// Every instance of `p` extending `seed` whose message the spy can synthesize.
/// Unbound agent variables range over the population.
void instantiate(const Pattern& p, const Binding& seed, const Knowledge& k,
                 const Population& pop, HashRule rule,
                 const std::function<void(const Binding&, const Msg&)>& out);

/// A forged event Says Spy receiver body, with the pattern binding it realises.
struct Forgery {
  Binding binding;
  Event event;
};

/// Forgeries matching pattern `target` (a receive pattern with unknown sender), with the
/// remaining patterns of `context` already matched in `events`.
std::vector<Forgery> forgeries_for(const std::vector<EventPattern>& context, std::size_t target,
                                   const std::vector<Event>& events, const Knowledge& k,
                                   const Population& pop, HashRule rule);

/// Receive patterns of every rule instantiated from spy knowledge, plus pure replays of
/// spy knowledge. Every element is synthesizable from spy_knowledge(evs).
MsgSet fake_candidates(const Trace& evs, const Protocol& proto, const Population& pop,
                       const SpyBudget& budget, HashRule rule = HashRule::Strong,
                       const std::vector<EventPattern>& extra = {});

}  // namespace inducta
