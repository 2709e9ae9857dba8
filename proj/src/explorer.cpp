#include "inducta/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <thread>

namespace inducta {

namespace {

using Ident = std::vector<Event>;
using Labels = std::vector<std::pair<std::uint64_t, std::string>>;

// One macro-step: a rule firing, a forged message together with the firing that
// consumes it, or a forged message matching a property trigger.
struct Step {
  std::vector<Event> events;
  std::vector<EventNote> notes;
  Labels labels;
  Ident id;  // events with the step's own fresh atoms replaced by placeholders
};

struct Node {
  std::vector<Event> events;  // oldest first
  std::vector<EventNote> notes;
  Labels labels;
  MsgSet used;
  AnalzSet analz;
  std::vector<Ident> sleep;
};

// Fresh atoms of a step, split by sort; index j maps to placeholder j.
struct FreshAtoms {
  std::vector<std::uint64_t> nonces;
  std::vector<KeyId> keys;

  explicit FreshAtoms(const std::vector<Msg>& fresh) {
    for (const auto& m : fresh) {
      if (m.is(MsgKind::Nonce)) nonces.push_back(m.as_number());
      else if (m.is(MsgKind::Key)) keys.push_back(m.as_key());
    }
  }
  std::optional<std::size_t> nonce(std::uint64_t n) const {
    for (std::size_t j = 0; j < nonces.size(); ++j)
      if (nonces[j] == n) return j;
    return std::nullopt;
  }
  std::optional<std::size_t> key(KeyId k) const {
    for (std::size_t j = 0; j < keys.size(); ++j)
      if (keys[j] == k) return j;
    return std::nullopt;
  }
};

KeyId key_placeholder(std::size_t j) {
  return KeyId::session(std::numeric_limits<std::uint32_t>::max() - std::uint32_t(j));
}

// Returns m itself when it contains no fresh atom.
Msg mask(const Msg& m, const FreshAtoms& f, bool& changed) {
  changed = false;
  switch (m.kind()) {
    case MsgKind::Nonce:
      if (auto j = f.nonce(m.as_number())) {
        changed = true;
        return Msg::nonce(std::numeric_limits<std::uint64_t>::max() - *j);
      }
      return m;
    case MsgKind::Key:
      if (auto j = f.key(m.as_key())) {
        changed = true;
        return Msg::key(key_placeholder(*j));
      }
      return m;
    case MsgKind::Hash: {
      Msg x = mask(m.body(), f, changed);
      return changed ? Msg::hash(std::move(x)) : m;
    }
    case MsgKind::MPair: {
      bool c1 = false, c2 = false;
      Msg x = mask(m.first(), f, c1);
      Msg y = mask(m.second(), f, c2);
      changed = c1 || c2;
      return changed ? Msg::mpair(std::move(x), std::move(y)) : m;
    }
    case MsgKind::Crypt: {
      auto j = f.key(m.as_key());
      Msg x = mask(m.body(), f, changed);
      if (!j && !changed) return m;
      changed = true;
      return Msg::crypt(j ? key_placeholder(*j) : m.as_key(), std::move(x));
    }
    default: return m;
  }
}

Ident identify(const std::vector<Event>& evs, const std::vector<Msg>& fresh) {
  if (fresh.empty()) return evs;
  const FreshAtoms atoms(fresh);
  Ident out;
  for (Event e : evs) {
    bool changed = false;
    e.body = mask(e.body, atoms, changed);
    out.push_back(std::move(e));
  }
  return out;
}

bool has_event(const std::vector<Event>& evs, const Event& e) {
  return std::find(evs.begin(), evs.end(), e) != evs.end();
}

bool has_delivery(const std::vector<Event>& evs, const Event& f) {
  return std::any_of(evs.begin(), evs.end(), [&](const Event& e) {
    return e.is_says() && e.receiver == f.receiver && e.body == f.body;
  });
}

std::optional<AgentId> impersonated(const AgentTerm& sender, const Binding& b) {
  if (!sender.is_var()) return std::nullopt;
  std::string base = sender.var;
  while (!base.empty() && base.back() == '\'') base.pop_back();
  if (auto a = b.agent(base)) return a;
  if (base == "S") return AgentId::server();
  return std::nullopt;
}

Labels fresh_labels(const Rule& r, const std::vector<Msg>& fresh) {
  Labels out;
  for (std::size_t i = 0; i < r.fresh.size() && i < fresh.size(); ++i)
    if (fresh[i].is(MsgKind::Nonce)) out.emplace_back(fresh[i].as_number(), r.fresh[i].var);
  return out;
}

AnnotatedTrace annotate(const Node& n) {
  AnnotatedTrace t;
  t.trace = Trace::from_oldest_first(n.events);
  t.notes = n.notes;
  for (const auto& [i, l] : n.labels) t.labels[i] = l;
  return t;
}

Population effective_population(const Protocol& proto, const ExploreConfig& cfg) {
  Population p = cfg.pop;
  p.infrastructure = proto.infrastructure;
  return p;
}

// Contexts whose unknown-sender patterns the spy may satisfy without anyone reacting.
std::vector<std::vector<EventPattern>> trigger_contexts(const PropertySpec& p) {
  std::vector<std::vector<EventPattern>> out;
  if (auto* a = std::get_if<Agreement>(&p.body)) out.push_back(a->trigger);
  if (auto* s = std::get_if<Secrecy>(&p.body)) out.push_back(s->says);
  std::erase_if(out, [](const auto& ctx) {
    return std::none_of(ctx.begin(), ctx.end(), [](const EventPattern& e) { return e.unknown_sender; });
  });
  return out;
}

class Search {
 public:
  Search(const Protocol& proto, const ExploreConfig& cfg, std::vector<std::vector<EventPattern>> contexts,
         bool honest_only)
      : cfg_(cfg), pop_(effective_population(proto, cfg)), contexts_(std::move(contexts)),
        honest_only_(honest_only) {
    for (const auto& r : proto.rules)
      if (!(r.is_oops && (cfg.no_oops || honest_only))) rules_.push_back(r);
    std::vector<EventPattern> extra;
    for (const auto& c : contexts_) extra.insert(extra.end(), c.begin(), c.end());
    Protocol p = proto;
    p.rules = rules_;
    shapes_ = relevant_shapes(p, extra);
  }

  const Population& pop() const { return pop_; }

  Node root() const {
    Node n;
    n.used = used(Trace{}, pop_);
    n.analz = AnalzSet(init_state(AgentId::spy(), pop_));
    return n;
  }

  Node apply(const Node& n, const Step& s) const {
    Node c;
    c.events = n.events;
    c.notes = n.notes;
    c.labels = n.labels;
    c.used = n.used;
    c.analz = n.analz;
    for (const auto& e : s.events) {
      c.events.push_back(e);
      parts_insert(c.used, e.body);
      if (spy_sees(e, pop_)) c.analz.insert(e.body);
    }
    c.notes.insert(c.notes.end(), s.notes.begin(), s.notes.end());
    c.labels.insert(c.labels.end(), s.labels.begin(), s.labels.end());
    return c;
  }

  std::vector<Step> steps(const Node& n) const {
    std::vector<Step> out;
    auto push = [&](Step s) {
      for (const auto& o : out)
        if (o.id == s.id) return;
      out.push_back(std::move(s));
    };

    const TraceView view{n.events, n.used, pop_};
    for (const auto& r : rules_) {
      for (auto& f : fireable(r, view)) {
        if (cfg_.dedupe && has_event(n.events, f.event)) continue;
        Step s;
        s.events = {f.event};
        s.notes = {EventNote{r.name, std::nullopt}};
        s.labels = fresh_labels(r, f.fresh);
        s.id = identify(s.events, f.fresh);
        push(std::move(s));
      }
    }
    if (honest_only_) return out;

    const Knowledge k(n.analz.items(), shapes_, cfg_.budget);
    for (const auto& r : rules_) {
      for (std::size_t i = 0; i < r.premises.size(); ++i) {
        const EventPattern& prem = r.premises[i];
        if (!prem.unknown_sender) continue;
        for (const auto& fg : forgeries_for(r.premises, i, n.events, k, pop_, cfg_.hash_rule)) {
          if (has_delivery(n.events, fg.event)) continue;
          std::vector<Event> evs = n.events;
          evs.push_back(fg.event);
          MsgSet u = n.used;
          parts_insert(u, fg.event.body);
          const TraceView v2{evs, u, pop_};
          for (auto& f : fire_from(r, fg.binding, v2)) {
            if (cfg_.dedupe && has_event(evs, f.event)) continue;
            Step s;
            s.events = {fg.event, f.event};
            s.notes = {EventNote{"Fake", impersonated(prem.sender, f.binding)}, EventNote{r.name, std::nullopt}};
            s.labels = fresh_labels(r, f.fresh);
            s.id = identify(s.events, f.fresh);
            push(std::move(s));
          }
        }
      }
    }
    for (const auto& ctx : contexts_) {
      for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (!ctx[i].unknown_sender) continue;
        for (const auto& fg : forgeries_for(ctx, i, n.events, k, pop_, cfg_.hash_rule)) {
          if (has_delivery(n.events, fg.event)) continue;
          Step s;
          s.events = {fg.event};
          s.notes = {EventNote{"Fake", impersonated(ctx[i].sender, fg.binding)}};
          s.id = s.events;
          push(std::move(s));
        }
      }
    }
    return out;
  }

 private:
  const ExploreConfig& cfg_;
  Population pop_;
  std::vector<Rule> rules_;
  std::vector<std::vector<EventPattern>> contexts_;
  std::vector<Pattern> shapes_;
  bool honest_only_;
};

// Predicate on a node; returns a violation description when the node is a hit.
struct Hit {
  Binding binding;
  std::string detail;
};
using Goal = std::function<std::optional<Hit>(const Node&)>;
using Observe = std::function<void(const Node&)>;

struct Found {
  Node node;
  Hit hit;
};

// Depth-first enumeration of one iterative-deepening level.
class Level {
 public:
  Level(const Search& s, const ExploreConfig& cfg, std::uint32_t depth, const Goal& goal,
        const Observe& observe, std::atomic<std::uint64_t>& visited, std::atomic<bool>& truncated)
      : s_(s), cfg_(cfg), depth_(depth), goal_(goal), observe_(observe), visited_(visited),
        truncated_(truncated) {}

  // Runs the subtree below n; stop() is polled to abandon the search.
  template <typename Stop>
  std::optional<Found> run(const Node& n, const Stop& stop) const {
    if (stop() || truncated_.load(std::memory_order_relaxed)) return std::nullopt;
    std::uint64_t seen = visited_.fetch_add(1, std::memory_order_relaxed) + 1;
    if (cfg_.max_states != 0 && seen > cfg_.max_states) {
      truncated_ = true;
      return std::nullopt;
    }
    if (n.events.size() == depth_) {
      observe_(n);
      if (auto h = goal_(n)) return Found{n, std::move(*h)};
      return std::nullopt;
    }
    std::vector<Ident> done;
    for (const auto& st : s_.steps(n)) {
      if (n.events.size() + st.events.size() > depth_) continue;
      if (cfg_.dedupe && std::find(n.sleep.begin(), n.sleep.end(), st.id) != n.sleep.end()) continue;
      Node c = s_.apply(n, st);
      if (cfg_.dedupe) {
        c.sleep = n.sleep;
        c.sleep.insert(c.sleep.end(), done.begin(), done.end());
        done.push_back(st.id);
      }
      if (auto f = run(c, stop)) return f;
    }
    return std::nullopt;
  }

  // Like run, but stops `split` macro-steps down and hands those nodes back as tasks.
  // Hits above the split are reported with the number of tasks emitted before them.
  void split(const Node& n, std::uint32_t levels, std::vector<Node>& tasks,
             std::optional<std::pair<std::size_t, Found>>& early) const {
    if (early) return;
    if (levels == 0) {
      tasks.push_back(n);
      return;
    }
    visited_.fetch_add(1, std::memory_order_relaxed);
    if (n.events.size() == depth_) {
      observe_(n);
      if (auto h = goal_(n)) early.emplace(tasks.size(), Found{n, std::move(*h)});
      return;
    }
    std::vector<Ident> done;
    for (const auto& st : s_.steps(n)) {
      if (n.events.size() + st.events.size() > depth_) continue;
      if (cfg_.dedupe && std::find(n.sleep.begin(), n.sleep.end(), st.id) != n.sleep.end()) continue;
      Node c = s_.apply(n, st);
      if (cfg_.dedupe) {
        c.sleep = n.sleep;
        c.sleep.insert(c.sleep.end(), done.begin(), done.end());
        done.push_back(st.id);
      }
      split(c, levels - 1, tasks, early);
      if (early) return;
    }
  }

 private:
  const Search& s_;
  const ExploreConfig& cfg_;
  std::uint32_t depth_;
  const Goal& goal_;
  const Observe& observe_;
  std::atomic<std::uint64_t>& visited_;
  std::atomic<bool>& truncated_;
};

struct LevelResult {
  std::optional<Found> found;
  std::uint64_t visited = 0;
  bool truncated = false;
};

LevelResult run_level(const Search& s, const ExploreConfig& cfg, std::uint32_t depth, const Goal& goal,
                      const Observe& observe) {
  std::atomic<std::uint64_t> visited{0};
  std::atomic<bool> truncated{false};
  Level level(s, cfg, depth, goal, observe, visited, truncated);
  LevelResult res;

  unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  if (jobs <= 1) {
    res.found = level.run(s.root(), [] { return false; });
    res.visited = visited;
    res.truncated = truncated;
    return res;
  }

  std::vector<Node> tasks;
  std::optional<std::pair<std::size_t, Found>> early;
  level.split(s.root(), std::min<std::uint32_t>(2, depth), tasks, early);
  // Order key: an early hit emitted before task p precedes it (2p); task t has key 2t+1.
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::atomic<std::size_t> best{early ? 2 * early->first : none};
  std::vector<std::optional<Found>> results(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const std::size_t key = 2 * t + 1;
      if (key > best.load()) continue;
      auto f = level.run(tasks[t], [&] { return best.load(std::memory_order_relaxed) < key; });
      if (f) {
        results[t] = std::move(f);
        std::size_t cur = best.load();
        while (key < cur && !best.compare_exchange_weak(cur, key)) {
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  const std::size_t b = best.load();
  if (b != none) {
    if (b % 2 == 0)
      res.found = std::move(early->second);
    else
      res.found = std::move(results[b / 2]);
  }
  res.visited = visited;
  res.truncated = truncated;
  return res;
}

}  // namespace

Verdict explore(const Protocol& proto, const ExploreConfig& cfg, const PropertySpec& prop) {
  Search search(proto, cfg, trigger_contexts(prop), false);
  const Population& pop = search.pop();

  Verdict v;
  std::mutex monitor_mu;
  std::uint64_t monitor_failures = 0;
  std::optional<MonitorFailure> first_monitor;

  Goal goal = [&](const Node& n) -> std::optional<Hit> {
    TraceFacts facts(n.events, pop, n.analz.items());
    if (auto viol = check(facts, prop)) return Hit{viol->binding, viol->detail};
    return std::nullopt;
  };
  Observe observe = [&](const Node& n) {
    if (cfg.monitors.empty()) return;
    TraceFacts facts(n.events, pop, n.analz.items());
    for (const auto& m : cfg.monitors) {
      auto viol = check(facts, m);
      if (!viol) continue;
      std::lock_guard lock(monitor_mu);
      ++monitor_failures;
      if (!first_monitor) first_monitor = MonitorFailure{m.name, viol->detail, annotate(n)};
    }
  };

  for (std::uint32_t d = 1; d <= cfg.max_events; ++d) {
    auto res = run_level(search, cfg, d, goal, observe);
    v.bound = d;
    v.traces_explored = res.visited;
    v.truncated = res.truncated;
    if (res.found) {
      v.kind = Verdict::Kind::Counterexample;
      v.counterexample = annotate(res.found->node);
      v.binding = res.found->hit.binding;
      v.detail = res.found->hit.detail;
      break;
    }
    if (res.truncated) break;
  }
  v.bound = cfg.max_events;
  v.monitor_failures = monitor_failures;
  v.first_monitor_failure = std::move(first_monitor);
  return v;
}

std::optional<AnnotatedTrace> find_run(const Protocol& proto, const std::vector<EventPattern>& goal_pats,
                                       const ExploreConfig& cfg, const std::string& final_rule) {
  if (goal_pats.empty()) return std::nullopt;
  Search search(proto, cfg, {}, true);
  ExploreConfig seq = cfg;
  seq.jobs = 1;
  Goal goal = [&](const Node& n) -> std::optional<Hit> {
    Binding b;
    if (n.events.empty() || !goal_pats.front().match(n.events.back(), b)) return std::nullopt;
    if (!final_rule.empty() && n.notes.back().rule != final_rule) return std::nullopt;
    std::vector<EventPattern> rest(goal_pats.begin() + 1, goal_pats.end());
    auto ms = match_all(rest, n.events, b);
    if (ms.empty()) return std::nullopt;
    return Hit{ms.front(), {}};
  };
  Observe observe = [](const Node&) {};
  for (std::uint32_t d = 1; d <= cfg.max_events; ++d) {
    auto res = run_level(search, seq, d, goal, observe);
    if (res.found) return annotate(res.found->node);
    if (res.truncated) break;
  }
  return std::nullopt;
}

std::vector<Trace> successors(const Trace& evs, const Protocol& proto, const ExploreConfig& cfg) {
  const Population pop = effective_population(proto, cfg);
  const auto events = evs.oldest_first();
  const MsgSet u = used(evs, pop);
  const TraceView view{events, u, pop};
  std::vector<Trace> out;
  std::vector<Event> added;
  auto add = [&](const Event& e) {
    if (has_event(added, e)) return;
    added.push_back(e);
    out.push_back(evs.extend(e));
  };
  for (const auto& r : proto.rules) {
    if (r.is_oops && cfg.no_oops) continue;
    for (const auto& f : fireable(r, view)) add(f.event);
  }
  for (const auto& x : fake_candidates(evs, proto, pop, cfg.budget, cfg.hash_rule))
    for (const auto& b : pop.agents())
      if (!b.is_spy()) add(Event::says(AgentId::spy(), b, x));
  return out;
}

namespace {

// A binding under which `r` produces exactly `ev` from the prefix, if there is one.
std::optional<Binding> derive(const Rule& r, const Event& ev, const TraceView& view) {
  Binding b0;
  if (!r.produces.match(ev, b0)) return std::nullopt;
  for (const auto& b : match_all(r.premises, view.events, b0)) {
    bool ok = true;
    for (const auto& d : r.distinct) {
      auto x = d.lhs.resolve(b), y = d.rhs.resolve(b);
      if (x && y && *x == *y) ok = false;
    }
    std::vector<Msg> fresh;
    for (const auto& f : r.fresh) {
      const Msg* m = b.find(f.var);
      const bool sort_ok = m && (f.kind == FreshDecl::Kind::Nonce
                                     ? m->is(MsgKind::Nonce)
                                     : m->is(MsgKind::Key) && m->as_key().is_session());
      if (!sort_ok || view.used.contains(*m) ||
          std::find(fresh.begin(), fresh.end(), *m) != fresh.end()) {
        ok = false;
        break;
      }
      fresh.push_back(*m);
    }
    if (!ok) continue;
    if (r.action == Rule::Action::ServerRespond) {
      auto request = r.premises.empty() ? std::nullopt : r.premises.front().body.substitute(b);
      if (!request) continue;
      const auto triples = respond(view.used, *request);
      if (std::none_of(triples.begin(), triples.end(),
                       [&](const RespondTriple& t) { return t.response == ev.body; }))
        continue;
    }
    return b;
  }
  return std::nullopt;
}

}  // namespace

ReplayResult replay(const Trace& evs, const Protocol& proto, const ExploreConfig& cfg) {
  const Population pop = effective_population(proto, cfg);
  ReplayResult res;
  std::vector<Event> prefix;
  MsgSet u = used(Trace{}, pop);
  AnalzSet known(init_state(AgentId::spy(), pop));

  for (const auto& ev : evs.oldest_first()) {
    const TraceView view{prefix, u, pop};
    std::optional<EventNote> note;
    for (const auto& r : proto.rules) {
      if (r.is_oops && cfg.no_oops) continue;
      if (derive(r, ev, view)) {
        note = EventNote{r.name, std::nullopt};
        break;
      }
    }
    if (!note && ev.is_says() && ev.sender.is_spy() && !ev.receiver.is_spy() &&
        pop.contains(ev.receiver) && synthesizable(ev.body, known.items(), cfg.hash_rule)) {
      note = EventNote{"Fake", std::nullopt};
      // Name the impersonated agent after the receive pattern the forgery fits.
      for (const auto& r : proto.rules) {
        for (const auto& p : r.premises) {
          Binding b;
          if (!p.unknown_sender || !p.match(ev, b)) continue;
          note->as = impersonated(p.sender, b);
          if (note->as) break;
        }
        if (note->as) break;
      }
    }
    if (!note) {
      res.ok = false;
      res.failed_index = prefix.size();
      res.reason = "event " + std::to_string(prefix.size() + 1) + " (" + render(ev) +
                   ") is not derivable from its prefix";
      return res;
    }
    res.notes.push_back(*note);
    prefix.push_back(ev);
    parts_insert(u, ev.body);
    if (spy_sees(ev, pop)) known.insert(ev.body);
  }
  return res;
}

}  // namespace inducta
