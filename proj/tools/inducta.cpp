// inducta: bounded analysis of inductively specified security protocols.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "inducta/explorer.hpp"
#include "inducta/laws.hpp"

using namespace inducta;

namespace {

enum Exit : int { kHolds = 0, kViolated = 1, kUsage = 2, kInconclusive = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Target {
  std::string name;
  ProtocolFile file;
};

Target load_target(const std::string& spec) {
  constexpr std::string_view prefix = "builtin:";
  if (spec.starts_with(prefix)) {
    std::string name = spec.substr(prefix.size());
    try {
      return {name, {builtin(name), builtin_properties(name)}};
    } catch (const std::invalid_argument&) {
      throw UsageError("unknown built-in protocol '" + name + "'");
    }
  }
  auto pf = parse_protocol_file(read_file(spec));
  if (pf.properties.empty()) pf.properties = builtin_properties(pf.protocol.name);
  return {pf.protocol.name, std::move(pf)};
}

std::vector<PropertySpec> select_properties(const Target& t, const std::string& sel) {
  if (sel.empty()) {
    if (t.file.properties.empty()) throw UsageError("protocol '" + t.name + "' declares no properties");
    return t.file.properties;
  }
  for (const auto& p : t.file.properties)
    if (p.name == sel) return {p};
  if (std::filesystem::exists(sel)) {
    std::vector<PropertySpec> out;
    std::istringstream in(read_file(sel));
    std::string line;
    while (std::getline(in, line))
      if (line.find_first_not_of(" \t") != std::string::npos && line.rfind("property", line.find_first_not_of(" \t")) == line.find_first_not_of(" \t"))
        out.push_back(parse_property(line));
    if (out.empty()) throw UsageError("no property declarations in " + sel);
    return out;
  }
  if (sel.starts_with("property ")) return {parse_property(sel)};
  throw UsageError("unknown property '" + sel + "' for " + t.name);
}

struct Common {
  std::uint32_t max_events = 8;
  std::uint32_t agents = 2;
  std::string bad = "Spy";
  unsigned jobs = 1;
  bool strict_hash = false;
  bool no_oops = false;
  std::string format = "text";
  std::uint64_t max_states = 0;
  std::uint32_t max_depth = 16;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--max-events", c.max_events, "event bound (default 8)")->check(CLI::PositiveNumber);
  app->add_option("--agents", c.agents, "number of friends (default 2)");
  app->add_option("--bad", c.bad, "comma-separated compromised agents (default Spy)");
  app->add_option("--jobs", c.jobs, "worker threads, 0 = all cores (default 1)");
  app->add_flag("--strict-paper-hash", c.strict_hash, "spy hashes only messages it holds");
  app->add_flag("--no-oops", c.no_oops, "disable the Oops rule");
  app->add_option("--format", c.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
  app->add_option("--max-states", c.max_states, "state budget, 0 = unlimited");
  app->add_option("--max-depth", c.max_depth, "term depth cap for forged components (default 16)");
}

ExploreConfig make_config(const Common& c) {
  ExploreConfig cfg;
  cfg.max_events = c.max_events;
  cfg.pop.friends = c.agents;
  cfg.pop.bad.clear();
  cfg.pop.bad.insert(AgentId::spy());
  std::stringstream ss(c.bad);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (item.empty()) continue;
    Msg m = [&] {
      try {
        return parse_msg(item);
      } catch (const ParseError&) {
        throw UsageError("--bad: '" + item + "' is not an agent");
      }
    }();
    if (!m.is(MsgKind::Agent)) throw UsageError("--bad: '" + item + "' is not an agent");
    cfg.pop.bad.insert(m.as_agent());
  }
  try {
    cfg.pop.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("population: ") + e.what());
  }
  cfg.jobs = c.jobs;
  cfg.hash_rule = c.strict_hash ? HashRule::StrictPaper : HashRule::Strong;
  cfg.no_oops = c.no_oops;
  cfg.max_states = c.max_states;
  cfg.budget.max_depth = c.max_depth;
  return cfg;
}

std::string population_text(const Population& pop) {
  std::string s;
  for (const auto& a : pop.agents()) s += (s.empty() ? "" : ", ") + render(a);
  std::string b;
  for (const auto& a : pop.bad) b += (b.empty() ? "" : ", ") + render(a);
  return s + " (bad: " + b + ")";
}

void print_trace_lines(std::ostream& os, const AnnotatedTrace& t, const char* key) {
  std::istringstream in(render_trace(t));
  std::string line;
  while (std::getline(in, line)) os << key << ": " << line << '\n';
}

int cmd_check(const std::string& target, const std::string& prop, const Common& c) {
  Target t = load_target(target);
  auto props = select_properties(t, prop);
  ExploreConfig cfg = make_config(c);
  int exit = kHolds;
  for (const auto& p : props) {
    if (auto missing = unbound_variables(p); !missing.empty())
      throw UsageError("property '" + p.name + "' uses unbound variable " + missing.front());
    auto start = std::chrono::steady_clock::now();
    Verdict v = explore(t.file.protocol, cfg, p);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* verdict = !v.holds() ? "counterexample" : v.truncated ? "inconclusive" : "holds";
    if (c.format == "structured") {
      std::cout << "protocol: " << t.name << "\nproperty: " << p.name << "\nverdict: " << verdict
                << "\nbound: " << cfg.max_events << "\npopulation: " << population_text(cfg.pop)
                << "\ntraces-explored: " << v.traces_explored
                << "\ntruncated: " << (v.truncated ? "true" : "false") << "\nwall-seconds: " << secs
                << '\n';
      if (!v.holds()) {
        std::cout << "detail: " << v.detail << '\n';
        print_trace_lines(std::cout, v.counterexample, "event");
      }
      std::cout << "end\n";
    } else {
      std::cout << t.name << " / " << p.name << ": ";
      if (!v.holds()) {
        std::cout << "COUNTEREXAMPLE (" << v.counterexample.trace.size() << " events, "
                  << v.traces_explored << " traces explored, " << secs << " s)\n"
                  << "  " << v.detail << '\n'
                  << render_trace(v.counterexample);
      } else {
        std::cout << (v.truncated ? "INCONCLUSIVE (state budget exhausted)" : "holds")
                  << " at bound " << cfg.max_events << " (" << v.traces_explored
                  << " traces explored, " << secs << " s)\n";
      }
    }
    if (!v.holds())
      exit = kViolated;
    else if (v.truncated && exit == kHolds)
      exit = kInconclusive;
  }
  return exit;
}

int cmd_run(const std::string& target, const Common& c) {
  Target t = load_target(target);
  ExploreConfig cfg = make_config(c);
  const Rule* last = nullptr;
  for (const auto& r : t.file.protocol.rules)
    if (!r.is_oops) last = &r;
  if (!last) throw UsageError("protocol has no rules");
  auto run = find_run(t.file.protocol, {last->produces}, cfg, last->name);
  if (c.format == "structured") {
    std::cout << "protocol: " << t.name << "\ngoal: " << last->name
              << "\nverdict: " << (run ? "run-found" : "no-run") << "\nbound: " << cfg.max_events << '\n';
    if (run) print_trace_lines(std::cout, *run, "event");
    std::cout << "end\n";
  } else if (run) {
    std::cout << t.name << ": run reaching " << last->name << " (" << run->trace.size() << " events)\n"
              << render_trace(*run);
  } else {
    std::cout << t.name << ": no run reaching " << last->name << " within " << cfg.max_events
              << " events\n";
  }
  return run ? kHolds : kViolated;
}

int cmd_replay(const std::string& file, const std::string& target, const Common& c) {
  Target t = load_target(target);
  AnnotatedTrace at = parse_trace(read_file(file));
  ExploreConfig cfg = make_config(c);
  auto r = replay(at.trace, t.file.protocol, cfg);
  if (c.format == "structured") {
    std::cout << "protocol: " << t.name << "\nverdict: " << (r.ok ? "derivable" : "not-derivable")
              << "\nevents: " << at.trace.size() << '\n';
    if (!r.ok) std::cout << "failed-index: " << r.failed_index + 1 << "\nreason: " << r.reason << '\n';
    std::cout << "end\n";
  } else if (r.ok) {
    std::cout << file << ": derivable under " << t.name << " (" << at.trace.size() << " events)\n";
    for (std::size_t i = 0; i < r.notes.size(); ++i) std::cout << "  " << i + 1 << ". " << r.notes[i].rule << '\n';
  } else {
    std::cout << file << ": NOT derivable: " << r.reason << '\n';
  }
  return r.ok ? kHolds : kViolated;
}

int cmd_laws(std::size_t samples, std::uint64_t seed, const Common& c) {
  LawConfig cfg;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.rule = c.strict_hash ? HashRule::StrictPaper : HashRule::Strong;
  auto rep = run_laws(cfg);
  for (const auto& f : rep.failures)
    std::cout << "FAIL " << f.law << " (sample " << f.sample << ")" << (f.detail.empty() ? "" : ": " + f.detail) << '\n';
  std::cout << rep.laws.size() << " laws, " << rep.samples << " samples, " << rep.checks << " checks, "
            << rep.failures.size() << " failures\n";
  return rep.ok() ? kHolds : kViolated;
}

int cmd_show(const std::string& target) {
  std::cout << print_protocol(load_target(target).file.protocol);
  return kHolds;
}

int cmd_list() {
  for (const auto& n : builtin_names()) {
    Protocol p = builtin(n);
    std::cout << n << "  rules:";
    for (const auto& r : p.rules) std::cout << ' ' << r.name;
    std::cout << "  properties:";
    for (const auto& pr : builtin_properties(n)) std::cout << ' ' << pr.name;
    std::cout << '\n';
  }
  return kHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inducta: bounded analysis of inductively specified security protocols"};
  app.require_subcommand(1);
  Common common;
  std::string target, prop, file, protocol;
  std::size_t samples = 500;
  std::uint64_t seed = 1;

  auto* check = app.add_subcommand("check", "search for a property violation");
  check->add_option("protocol", target, "builtin:NAME or a .proto file")->required();
  check->add_option("--property", prop, "property name, property file or inline declaration");
  add_common(check, common);

  auto* run = app.add_subcommand("run", "find a complete honest run");
  run->add_option("protocol", target, "builtin:NAME or a .proto file")->required();
  add_common(run, common);

  auto* rep = app.add_subcommand("replay", "check that a stored trace is derivable");
  rep->add_option("trace", file, ".trace file")->required();
  rep->add_option("--protocol", protocol, "builtin:NAME or a .proto file")->required();
  add_common(rep, common);

  auto* laws = app.add_subcommand("laws", "randomized check of the closure laws");
  laws->add_option("--samples", samples, "random sets (default 500)");
  laws->add_option("--seed", seed, "random seed (default 1)");
  laws->add_flag("--strict-paper-hash", common.strict_hash, "spy hashes only messages it holds");

  auto* show = app.add_subcommand("show", "print a protocol in protocol-file syntax");
  show->add_option("protocol", target, "builtin:NAME or a .proto file")->required();

  app.add_subcommand("list", "list built-in protocols and properties");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*check) return cmd_check(target, prop, common);
    if (*run) return cmd_run(target, common);
    if (*rep) return cmd_replay(file, protocol, common);
    if (*laws) return cmd_laws(samples, seed, common);
    if (*show) return cmd_show(target);
    return cmd_list();
  } catch (const ParseError& e) {
    std::cerr << "inducta: parse error: " << e.what() << '\n';
  } catch (const UsageError& e) {
    std::cerr << "inducta: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "inducta: " << e.what() << '\n';
  }
  return kUsage;
}
