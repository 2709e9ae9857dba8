#include "inducta/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace inducta {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Rendering

std::string render(AgentId a) { return to_string(a); }
std::string render(KeyId k) { return to_string(k); }

namespace {

void render_into(std::string& out, const Msg& m, const NonceLabels* labels);

void render_elements(std::string& out, const Msg& m, const NonceLabels* labels) {
  const Msg* cur = &m;
  while (cur->is(MsgKind::MPair)) {
    render_into(out, cur->first(), labels);
    out += ", ";
    cur = &cur->second();
  }
  render_into(out, *cur, labels);
}

void render_into(std::string& out, const Msg& m, const NonceLabels* labels) {
  switch (m.kind()) {
    case MsgKind::Agent: out += render(m.as_agent()); break;
    case MsgKind::Number: out += std::to_string(m.as_number()); break;
    case MsgKind::Nonce: {
      std::string label = "N";
      if (labels) {
        if (auto it = labels->find(m.as_number()); it != labels->end()) label = it->second;
      }
      out += label + "#" + std::to_string(m.as_number());
      break;
    }
    case MsgKind::Key: out += render(m.as_key()); break;
    case MsgKind::Hash:
      out += "hash(";
      render_into(out, m.body(), labels);
      out += ")";
      break;
    case MsgKind::MPair:
      out += "{";
      render_elements(out, m, labels);
      out += "}";
      break;
    case MsgKind::Crypt:
      out += "{";
      render_elements(out, m.body(), labels);
      out += "}_" + render(m.as_key());
      break;
  }
}

}  // namespace

std::string render(const Msg& m, const NonceLabels* labels) {
  std::string out;
  render_into(out, m, labels);
  return out;
}

std::string render(const Event& e, const NonceLabels* labels) {
  if (e.is_says())
    return render(e.sender) + " -> " + render(e.receiver) + " : " + render(e.body, labels);
  return render(e.sender) + " notes " + render(e.body, labels);
}

// ---------------------------------------------------------------------------
// Lexing

namespace {

struct Token {
  enum class Kind { Ident, Labeled, Number, String, Sym, End };
  Kind kind = Kind::End;
  std::string text;        // identifier, label, string contents or symbol
  std::uint64_t value = 0; // Number, Labeled index
  std::size_t line = 0, col = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\''; }

std::uint64_t to_u64(std::string_view digits, std::size_t line, std::size_t col) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || p != digits.data() + digits.size())
    throw ParseError("number out of range: " + std::string(digits), line, col);
  return v;
}

/// Tokens of one physical line; `#` at a token boundary starts a comment.
std::vector<Token> lex_line(std::string_view s, std::size_t line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    std::size_t col = i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') break;
    Token t;
    t.line = line;
    t.col = col;
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() &&
             (ident_char(s[j]) || (s[j] == '-' && j + 1 < s.size() && ident_start(s[j + 1]))))
        ++j;
      t.text = std::string(s.substr(i, j - i));
      if (j < s.size() && s[j] == '#') {
        std::size_t k = j + 1;
        while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
        if (k == j + 1) throw ParseError("expected digits after '#'", line, j + 2);
        t.kind = Token::Kind::Labeled;
        t.value = to_u64(s.substr(j + 1, k - j - 1), line, j + 2);
        j = k;
      } else {
        t.kind = Token::Kind::Ident;
      }
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Token::Kind::Number;
      t.text = std::string(s.substr(i, j - i));
      t.value = to_u64(t.text, line, col);
      i = j;
    } else if (c == '"') {
      std::size_t j = s.find('"', i + 1);
      if (j == std::string_view::npos) throw ParseError("unterminated string", line, col);
      t.kind = Token::Kind::String;
      t.text = std::string(s.substr(i + 1, j - i - 1));
      i = j + 1;
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      t.kind = Token::Kind::Sym;
      t.text = "->";
      i += 2;
    } else if (c == '!' && i + 1 < s.size() && s[i + 1] == '=') {
      t.kind = Token::Kind::Sym;
      t.text = "!=";
      i += 2;
    } else if (std::string_view("{}()[],:;_?.").find(c) != std::string_view::npos) {
      t.kind = Token::Kind::Sym;
      t.text = std::string(1, c);
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = s.size() + 1;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Untyped term syntax shared by ground terms and patterns

struct Ast {
  enum class Kind { Ident, Opaque, Labeled, Number, KeyFn, Tuple, Crypt, Hash, HashPair };
  Kind kind = Kind::Ident;
  std::string name;   // Ident/Opaque name, Labeled label, KeyFn function
  std::string owner;  // KeyFn argument
  std::uint64_t value = 0;
  std::vector<Ast> kids;  // Tuple: elements; Crypt: key then body elements; Hash(Pair): operands
  std::size_t line = 0, col = 0;
};

bool is_key_fn(const std::string& s) { return s == "shrK" || s == "pubK" || s == "priK"; }

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is_sym(const char* s, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Sym && peek(k).text == s;
  }
  bool is_word(const char* s, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }
  std::string describe() const {
    if (at_end()) return "end of line";
    return "'" + peek().text + "'";
  }
  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(std::string("expected '") + s + "', found " + describe());
    next();
  }
  void expect_word(const char* s) {
    if (!is_word(s)) fail(std::string("expected '") + s + "', found " + describe());
    next();
  }
  std::string ident(const char* what) {
    if (peek().kind != Token::Kind::Ident) fail(std::string("expected ") + what + ", found " + describe());
    return next().text;
  }
  void expect_end() {
    if (!at_end()) fail("unexpected " + describe());
  }
  std::size_t position() const { return pos_; }

  Ast key_term() {
    Ast a;
    a.line = peek().line;
    a.col = peek().col;
    if (peek().kind == Token::Kind::Ident && is_key_fn(peek().text)) {
      a.kind = Ast::Kind::KeyFn;
      a.name = next().text;
      expect_sym("(");
      a.owner = ident("agent name");
      expect_sym(")");
    } else if (peek().kind == Token::Kind::Labeled) {
      a.kind = Ast::Kind::Labeled;
      a.name = peek().text;
      a.value = next().value;
    } else if (peek().kind == Token::Kind::Ident) {
      a.kind = Ast::Kind::Ident;
      a.name = next().text;
    } else {
      fail("expected a key, found " + describe());
    }
    return a;
  }

  Ast term() {
    Ast a;
    a.line = peek().line;
    a.col = peek().col;
    const Token& t = peek();
    if (is_sym("{")) {
      next();
      std::vector<Ast> elems;
      elems.push_back(term());
      while (is_sym(",")) {
        next();
        elems.push_back(term());
      }
      expect_sym("}");
      if (is_sym("_")) {
        next();
        a.kind = Ast::Kind::Crypt;
        a.kids.push_back(key_term());
        for (auto& e : elems) a.kids.push_back(std::move(e));
      } else if (elems.size() == 1) {
        return std::move(elems.front());
      } else {
        a.kind = Ast::Kind::Tuple;
        a.kids = std::move(elems);
      }
      return a;
    }
    if (t.kind == Token::Kind::Sym && t.text == "?") {
      next();
      a.kind = Ast::Kind::Opaque;
      a.name = ident("variable name after '?'");
      return a;
    }
    if (t.kind == Token::Kind::Labeled) {
      a.kind = Ast::Kind::Labeled;
      a.name = t.text;
      a.value = t.value;
      next();
      return a;
    }
    if (t.kind == Token::Kind::Number) {
      a.kind = Ast::Kind::Number;
      a.value = t.value;
      next();
      return a;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "hash" && (is_sym("(", 1) || is_sym("[", 1))) {
        next();
        if (is_sym("(")) {
          next();
          a.kind = Ast::Kind::Hash;
          a.kids.push_back(term());
          expect_sym(")");
        } else {
          next();
          a.kind = Ast::Kind::HashPair;
          a.kids.push_back(term());
          expect_sym("]");
          a.kids.push_back(term());
        }
        return a;
      }
      if (is_key_fn(t.text) && is_sym("(", 1)) return key_term();
      a.kind = Ast::Kind::Ident;
      a.name = t.text;
      next();
      return a;
    }
    fail("expected a message, found " + describe());
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Ground terms

[[noreturn]] void ast_fail(const Ast& a, const std::string& msg) {
  throw ParseError(msg, a.line, a.col);
}

std::optional<AgentId> agent_named(const std::string& s) {
  if (s == "S" || s == "Server") return AgentId::server();
  if (s == "Spy") return AgentId::spy();
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'R') return AgentId::friend_(s[0] - 'A' + 1);
  if (s.size() > 1 && s[0] == 'F' &&
      std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
    if (ec != std::errc{} || v > 0xFFFFFFFFu) return std::nullopt;
    return AgentId::friend_(static_cast<std::uint32_t>(v));
  }
  return std::nullopt;
}

KeyId key_fn(const std::string& fn, AgentId a) {
  if (fn == "shrK") return KeyId::shared(a);
  if (fn == "pubK") return KeyId::pub(a);
  return KeyId::priv(a);
}

AgentId ground_agent(const Ast& a, const std::string& name) {
  auto id = agent_named(name);
  if (!id) ast_fail(a, "unknown agent '" + name + "'");
  return *id;
}

KeyId ground_key(const Ast& a) {
  switch (a.kind) {
    case Ast::Kind::KeyFn: return key_fn(a.name, ground_agent(a, a.owner));
    case Ast::Kind::Labeled:
      if (a.name != "K") ast_fail(a, "session keys are written K#i");
      if (a.value > 0xFFFFFFFFu) ast_fail(a, "session key index out of range");
      return KeyId::session(static_cast<std::uint32_t>(a.value));
    default: ast_fail(a, "expected a key");
  }
}

Msg ground(const Ast& a, NonceLabels* labels) {
  switch (a.kind) {
    case Ast::Kind::Ident: return Msg::agent(ground_agent(a, a.name));
    case Ast::Kind::Opaque: ast_fail(a, "variables are not allowed in a ground term");
    case Ast::Kind::Labeled:
      if (a.name == "K") return Msg::key(ground_key(a));
      if (labels) (*labels)[a.value] = a.name;
      return Msg::nonce(a.value);
    case Ast::Kind::Number: return Msg::number(a.value);
    case Ast::Kind::KeyFn: return Msg::key(ground_key(a));
    case Ast::Kind::Tuple: {
      std::vector<Msg> xs;
      for (const auto& k : a.kids) xs.push_back(ground(k, labels));
      return mpair_n(xs);
    }
    case Ast::Kind::Crypt: {
      std::vector<Msg> xs;
      for (std::size_t i = 1; i < a.kids.size(); ++i) xs.push_back(ground(a.kids[i], labels));
      return Msg::crypt(ground_key(a.kids[0]), mpair_n(xs));
    }
    case Ast::Kind::Hash: return Msg::hash(ground(a.kids[0], labels));
    case Ast::Kind::HashPair: return hash_pair(ground(a.kids[0], labels), ground(a.kids[1], labels));
  }
  ast_fail(a, "malformed term");
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(start, nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == text.size()) break;
    start = nl + 1;
  }
  return lines;
}

}  // namespace

Msg parse_msg(std::string_view text, NonceLabels* labels) {
  Parser p(lex_line(text, 1));
  Ast a = p.term();
  p.expect_end();
  return ground(a, labels);
}

// ---------------------------------------------------------------------------
// Traces

std::string render_trace(const Trace& evs, const std::vector<EventNote>* notes,
                         const NonceLabels* labels) {
  std::string out;
  std::size_t n = 0, i = 0;
  for (const auto& e : evs.oldest_first()) {
    const EventNote* note = notes && i < notes->size() ? &(*notes)[i] : nullptr;
    ++i;
    if (e.is_says()) {
      out += std::to_string(++n) + ". ";
      if (note && note->as && e.sender.is_spy())
        out += "Spy(as " + render(*note->as) + ")";
      else
        out += render(e.sender);
      out += " -> " + render(e.receiver) + " : " + render(e.body, labels) + "\n";
    } else {
      bool oops = !note || note->rule.empty() || note->rule == "Oops";
      out += std::string(oops ? "oops: " : "notes: ") + render(e.sender) + " notes " +
             render(e.body, labels) + "\n";
    }
  }
  return out;
}

std::string render_trace(const AnnotatedTrace& t) {
  return render_trace(t.trace, &t.notes, &t.labels);
}

AnnotatedTrace parse_trace(std::string_view text) {
  AnnotatedTrace out;
  std::vector<Event> events;
  auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    Parser p(lex_line(lines[ln], ln + 1));
    if (p.at_end()) continue;
    EventNote note;
    if (p.is_word("oops") || p.is_word("notes")) {
      note.rule = p.next().text == "oops" ? "Oops" : "";
      p.expect_sym(":");
      Ast who;
      who.line = p.peek().line;
      who.col = p.peek().col;
      AgentId a = ground_agent(who, p.ident("agent name"));
      p.expect_word("notes");
      Msg body = ground(p.term(), &out.labels);
      p.expect_end();
      events.push_back(Event::notes(a, body));
      out.notes.push_back(note);
      continue;
    }
    if (p.peek().kind != Token::Kind::Number) p.fail("expected an event number or 'oops:'");
    p.next();
    p.expect_sym(".");
    Ast who;
    who.line = p.peek().line;
    who.col = p.peek().col;
    AgentId sender = ground_agent(who, p.ident("sender"));
    if (p.is_sym("(")) {
      if (!sender.is_spy()) p.fail("only Spy can impersonate");
      p.next();
      p.expect_word("as");
      who.line = p.peek().line;
      who.col = p.peek().col;
      note.as = ground_agent(who, p.ident("impersonated agent"));
      note.rule = "Fake";
      p.expect_sym(")");
    }
    p.expect_sym("->");
    who.line = p.peek().line;
    who.col = p.peek().col;
    AgentId receiver = ground_agent(who, p.ident("receiver"));
    p.expect_sym(":");
    Msg body = ground(p.term(), &out.labels);
    p.expect_end();
    events.push_back(Event::says(sender, receiver, body));
    out.notes.push_back(note);
  }
  out.trace = Trace::from_oldest_first(events);
  return out;
}

// ---------------------------------------------------------------------------
// Patterns with sort inference

namespace {

bool is_constant(const std::string& s) { return s == "Server" || s == "Spy"; }

AgentTerm agent_term(const std::string& s) {
  if (s == "Server") return AgentTerm::constant(AgentId::server());
  if (s == "Spy") return AgentTerm::constant(AgentId::spy());
  return AgentTerm::variable(s);
}

struct Located {
  std::string name;
  std::size_t line, col;
};

/// Sort assignment for the variables of one rule or property.
class Sorts {
 public:
  void declare(const Located& v, Sort s, bool explicit_decl) {
    if (is_constant(v.name)) {
      if (s == Sort::Agent) return;
      throw ParseError("'" + v.name + "' is an agent constant", v.line, v.col);
    }
    auto it = map_.find(v.name);
    if (it == map_.end()) {
      map_[v.name] = s;
      return;
    }
    if (it->second != s)
      throw ParseError("variable '" + v.name + "' used as both " + to_string(it->second) +
                           " and " + to_string(s),
                       v.line, v.col);
    (void)explicit_decl;
  }

  bool known(const std::string& n) const { return map_.contains(n); }
  Sort at(const std::string& n) const { return map_.at(n); }

  void infer(const Located& v) {
    if (is_constant(v.name) || known(v.name)) return;
    const std::string& n = v.name;
    std::string base = n;
    while (!base.empty() && (base.back() == '\'' || std::isdigit(static_cast<unsigned char>(base.back()))))
      base.pop_back();
    if (n.size() >= 2 && n[0] == 'N') {
      map_[n] = Sort::Nonce;
    } else if (n[0] == 'K') {
      map_[n] = Sort::Key;
    } else if (base.size() == 1 && std::isupper(static_cast<unsigned char>(base[0]))) {
      map_[n] = Sort::Agent;
    } else {
      throw ParseError("cannot infer the sort of '" + n +
                           "' (nonces start with N, keys with K, agents are single capitals; "
                           "write ?" + n + " for an opaque component)",
                       v.line, v.col);
    }
  }

 private:
  std::map<std::string, Sort> map_;
};

// First pass: declarations implied by position.
void scan_sorts(const Ast& a, Sorts& s, std::vector<Located>& plain) {
  switch (a.kind) {
    case Ast::Kind::Ident: plain.push_back({a.name, a.line, a.col}); break;
    case Ast::Kind::Opaque: s.declare({a.name, a.line, a.col}, Sort::Opaque, true); break;
    case Ast::Kind::KeyFn: s.declare({a.owner, a.line, a.col}, Sort::Agent, false); break;
    case Ast::Kind::Crypt: {
      const Ast& k = a.kids[0];
      if (k.kind == Ast::Kind::Ident)
        s.declare({k.name, k.line, k.col}, Sort::Key, false);
      else if (k.kind == Ast::Kind::KeyFn)
        s.declare({k.owner, k.line, k.col}, Sort::Agent, false);
      for (std::size_t i = 1; i < a.kids.size(); ++i) scan_sorts(a.kids[i], s, plain);
      break;
    }
    default:
      for (const auto& k : a.kids) scan_sorts(k, s, plain);
  }
}

KeyTerm key_pattern(const Ast& k, const Sorts& s) {
  switch (k.kind) {
    case Ast::Kind::KeyFn: {
      AgentTerm o = agent_term(k.owner);
      if (k.name == "shrK") return KeyTerm::shared(o);
      if (k.name == "pubK") return KeyTerm::pub(o);
      return KeyTerm::priv(o);
    }
    case Ast::Kind::Ident:
      if (s.at(k.name) != Sort::Key) ast_fail(k, "'" + k.name + "' is not a key");
      return KeyTerm::variable(k.name);
    case Ast::Kind::Labeled: return KeyTerm::constant(ground_key(k));
    default: ast_fail(k, "expected a key");
  }
}

Pattern to_pattern(const Ast& a, const Sorts& s) {
  switch (a.kind) {
    case Ast::Kind::Ident:
      if (is_constant(a.name)) return Pattern::agent(agent_term(a.name));
      return Pattern::var(a.name, s.at(a.name));
    case Ast::Kind::Opaque: return Pattern::var(a.name, Sort::Opaque);
    case Ast::Kind::Labeled: return Pattern::literal(ground(a, nullptr));
    case Ast::Kind::Number: return Pattern::literal(Msg::number(a.value));
    case Ast::Kind::KeyFn: return Pattern::key(key_pattern(a, s));
    case Ast::Kind::Tuple: {
      std::vector<Pattern> xs;
      for (const auto& k : a.kids) xs.push_back(to_pattern(k, s));
      return Pattern::tuple(std::move(xs));
    }
    case Ast::Kind::Crypt: {
      std::vector<Pattern> xs;
      for (std::size_t i = 1; i < a.kids.size(); ++i) xs.push_back(to_pattern(a.kids[i], s));
      return Pattern::crypt(key_pattern(a.kids[0], s), Pattern::tuple(std::move(xs)));
    }
    case Ast::Kind::Hash: return Pattern::hash(to_pattern(a.kids[0], s));
    case Ast::Kind::HashPair:
      return Pattern::hash_pair(to_pattern(a.kids[0], s), to_pattern(a.kids[1], s));
  }
  ast_fail(a, "malformed pattern");
}

// Event syntax shared by rules and properties: [?]S -> R : msg | [?]S R msg | S notes msg.
struct EventAst {
  bool notes = false;
  bool unknown = false;
  Located sender, receiver;
  Ast body;
};

Located located_ident(Parser& p, const char* what) {
  Located l{"", p.peek().line, p.peek().col};
  l.name = p.ident(what);
  return l;
}

EventAst parse_event(Parser& p, bool allow_bare_receiver) {
  EventAst e;
  if (p.is_sym("?")) {
    p.next();
    e.unknown = true;
  }
  e.sender = located_ident(p, "sender");
  if (p.is_word("notes")) {
    if (e.unknown) p.fail("a Notes event has a known author");
    p.next();
    e.notes = true;
    if (p.is_sym(":")) p.next();
    e.body = p.term();
    return e;
  }
  if (p.is_sym("->")) {
    p.next();
    e.receiver = located_ident(p, "receiver");
    p.expect_sym(":");
  } else if (allow_bare_receiver) {
    e.receiver = located_ident(p, "receiver");
    if (p.is_sym(":")) p.next();
  } else {
    p.fail("expected '->'");
  }
  e.body = p.term();
  return e;
}

void scan_event(const EventAst& e, Sorts& s, std::vector<Located>& plain) {
  s.declare(e.sender, Sort::Agent, false);
  if (!e.notes) s.declare(e.receiver, Sort::Agent, false);
  scan_sorts(e.body, s, plain);
}

EventPattern to_event(const EventAst& e, const Sorts& s) {
  if (e.notes) return EventPattern::notes(agent_term(e.sender.name), to_pattern(e.body, s));
  return EventPattern::says(agent_term(e.sender.name), agent_term(e.receiver.name),
                            to_pattern(e.body, s), e.unknown);
}

void finish_sorts(Sorts& s, const std::vector<Located>& plain) {
  for (const auto& v : plain) s.infer(v);
}

// ---------------------------------------------------------------------------
// Protocol files

struct Line {
  std::size_t number;
  std::string text;
};

struct RuleDraft {
  std::string name;
  std::size_t line, col;
  std::vector<std::pair<Located, FreshDecl::Kind>> fresh;
  std::vector<Located> opaque;
  std::vector<std::pair<Located, Located>> distinct;
  std::vector<EventAst> premises;
  std::optional<EventAst> produces;
};

bool has_var(const std::vector<std::pair<std::string, Sort>>& vs, const std::string& n) {
  return std::any_of(vs.begin(), vs.end(), [&](const auto& p) { return p.first == n; });
}

Rule build_rule(const RuleDraft& d) {
  if (!d.produces)
    throw ParseError("rule " + d.name + " has no 'send' or 'notes' line", d.line, d.col);
  Sorts s;
  std::vector<Located> plain;
  for (const auto& [v, k] : d.fresh)
    s.declare(v, k == FreshDecl::Kind::Nonce ? Sort::Nonce : Sort::Key, true);
  for (const auto& v : d.opaque) s.declare(v, Sort::Opaque, true);
  for (const auto& [x, y] : d.distinct) {
    s.declare(x, Sort::Agent, false);
    s.declare(y, Sort::Agent, false);
  }
  for (const auto& e : d.premises) scan_event(e, s, plain);
  scan_event(*d.produces, s, plain);
  finish_sorts(s, plain);

  Rule r;
  r.name = d.name;
  r.is_oops = d.name == "Oops";
  for (const auto& [v, k] : d.fresh) r.fresh.push_back({v.name, k});
  for (const auto& [x, y] : d.distinct) r.distinct.push_back({agent_term(x.name), agent_term(y.name)});
  for (const auto& e : d.premises) r.premises.push_back(to_event(e, s));
  r.produces = to_event(*d.produces, s);

  std::vector<std::pair<std::string, Sort>> premise_vars, produced_vars;
  for (const auto& p : r.premises) p.collect_vars(premise_vars);
  r.produces.collect_vars(produced_vars);
  for (const auto& [v, k] : d.fresh)
    if (has_var(premise_vars, v.name))
      throw ParseError("fresh variable '" + v.name + "' of rule " + d.name +
                           " also occurs in a premise",
                       v.line, v.col);
  for (const auto& [v, sort] : produced_vars) {
    if (sort == Sort::Agent || has_var(premise_vars, v)) continue;
    if (std::any_of(r.fresh.begin(), r.fresh.end(), [&](const FreshDecl& f) { return f.var == v; }))
      continue;
    throw ParseError("unbound variable '" + v + "' in the event produced by rule " + d.name,
                     d.produces->body.line, d.produces->body.col);
  }

  // A rule must not let an agent send to himself.
  if (r.produces.kind == Event::Kind::Says) {
    const AgentTerm& a = r.produces.sender;
    const AgentTerm& b = r.produces.receiver;
    bool excluded = false;
    if (!a.is_var() && !b.is_var()) excluded = !(a.value == b.value);
    for (const auto& dd : r.distinct)
      if ((dd.lhs == a && dd.rhs == b) || (dd.lhs == b && dd.rhs == a)) excluded = true;
    for (const auto& p : r.premises)
      if (p.kind == Event::Kind::Says && !p.unknown_sender && p.sender == a && p.receiver == b)
        excluded = true;
    if (!excluded)
      throw ParseError("rule " + d.name + " may send from " + d.produces->sender.name +
                           " to himself; add 'where " + d.produces->sender.name +
                           " != " + d.produces->receiver.name + "'",
                       d.produces->sender.line, d.produces->sender.col);
  }
  return r;
}

Rule oops_from_server(const Protocol& proto, const Ast& payload_ast, std::size_t line) {
  const Rule* server = nullptr;
  for (const auto& r : proto.rules)
    if (r.produces.kind == Event::Kind::Says && !r.produces.sender.is_var() &&
        r.produces.sender.value.is_server() && r.action == Rule::Action::Emit)
      server = &r;
  if (!server) throw ParseError("'oops' needs a rule in which Server sends", line, 1);

  Sorts s;
  std::vector<Located> plain;
  scan_sorts(payload_ast, s, plain);
  finish_sorts(s, plain);
  Pattern payload = to_pattern(payload_ast, s);

  std::vector<std::pair<std::string, Sort>> payload_vars;
  payload.collect_vars(payload_vars);
  std::string key_var;
  for (const auto& [v, sort] : payload_vars)
    if (sort == Sort::Key) key_var = v;

  Rule r;
  r.name = "Oops";
  r.is_oops = true;
  EventPattern prem = server->produces;
  for (const auto& f : server->fresh)
    if (f.kind == FreshDecl::Kind::SessionKey && !key_var.empty())
      prem.body = prem.body.rename(f.var, key_var);
  r.premises = {prem};
  r.distinct = {{prem.receiver, AgentTerm::constant(AgentId::spy())}};
  r.produces = EventPattern::notes(AgentTerm::constant(AgentId::spy()), payload);
  return r;
}

}  // namespace

Pattern parse_pattern(std::string_view text) {
  Parser p(lex_line(text, 1));
  Ast a = p.term();
  p.expect_end();
  Sorts s;
  std::vector<Located> plain;
  scan_sorts(a, s, plain);
  finish_sorts(s, plain);
  return to_pattern(a, s);
}

namespace {

PropertySpec parse_property_tokens(Parser& p);

}  // namespace

ProtocolFile parse_protocol_file(std::string_view text) {
  ProtocolFile out;
  Protocol& proto = out.protocol;
  bool named = false, infra_set = false;
  std::optional<RuleDraft> draft;
  std::set<std::string> rule_names;

  auto flush = [&]() {
    if (!draft) return;
    Rule r = build_rule(*draft);
    proto.rules.push_back(std::move(r));
    draft.reset();
  };
  auto add_rule_name = [&](const std::string& n, std::size_t line, std::size_t col) {
    if (!rule_names.insert(n).second) throw ParseError("duplicate rule '" + n + "'", line, col);
  };

  auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    Parser p(lex_line(lines[ln], ln + 1));
    if (p.at_end()) continue;
    const Token head = p.peek();
    if (head.kind != Token::Kind::Ident) p.fail("expected a keyword, found " + p.describe());
    const std::string& kw = head.text;

    if (kw == "protocol") {
      flush();
      p.next();
      if (named) p.fail("duplicate 'protocol' line");
      proto.name = p.ident("protocol name");
      p.expect_end();
      named = true;
      continue;
    }
    if (!named) p.fail("a protocol file starts with 'protocol NAME'");

    if (kw == "infrastructure") {
      flush();
      p.next();
      if (infra_set || !proto.rules.empty()) p.fail("'infrastructure' must come before the rules");
      std::string v = p.ident("'shared' or 'public'");
      if (v == "shared")
        proto.infrastructure = Infrastructure::SharedKey;
      else if (v == "public")
        proto.infrastructure = Infrastructure::PublicKey;
      else
        throw ParseError("expected 'shared' or 'public'", head.line, head.col + 15);
      p.expect_end();
      infra_set = true;
    } else if (kw == "rule") {
      flush();
      p.next();
      RuleDraft d;
      d.line = p.peek().line;
      d.col = p.peek().col;
      d.name = p.ident("rule name");
      p.expect_sym(":");
      p.expect_end();
      add_rule_name(d.name, d.line, d.col);
      draft = std::move(d);
    } else if (kw == "oops") {
      flush();
      p.next();
      Ast payload = p.term();
      p.expect_end();
      add_rule_name("Oops", head.line, head.col);
      proto.rules.push_back(oops_from_server(proto, payload, head.line));
    } else if (kw == "server") {
      flush();
      p.next();
      p.expect_word("recursive");
      std::string name = "RA3";
      if (p.is_word("as")) {
        p.next();
        name = p.ident("rule name");
      }
      p.expect_end();
      add_rule_name(name, head.line, head.col);
      proto.rules.push_back(server_respond_rule(name));
    } else if (kw == "property") {
      flush();
      out.properties.push_back(parse_property_tokens(p));
    } else if (draft) {
      p.next();
      if (kw == "fresh") {
        std::string k = p.ident("'nonce' or 'key'");
        FreshDecl::Kind kind;
        if (k == "nonce")
          kind = FreshDecl::Kind::Nonce;
        else if (k == "key")
          kind = FreshDecl::Kind::SessionKey;
        else
          throw ParseError("expected 'nonce' or 'key'", head.line, head.col + 6);
        draft->fresh.emplace_back(located_ident(p, "variable"), kind);
        p.expect_end();
      } else if (kw == "opaque") {
        draft->opaque.push_back(located_ident(p, "variable"));
        while (p.is_sym(",")) {
          p.next();
          draft->opaque.push_back(located_ident(p, "variable"));
        }
        p.expect_end();
      } else if (kw == "where") {
        for (;;) {
          Located x = located_ident(p, "agent");
          p.expect_sym("!=");
          Located y = located_ident(p, "agent");
          draft->distinct.emplace_back(x, y);
          if (!p.is_sym(",")) break;
          p.next();
        }
        p.expect_end();
      } else if (kw == "seen") {
        draft->premises.push_back(parse_event(p, false));
        p.expect_end();
      } else if (kw == "send") {
        if (draft->produces) p.fail("rule " + draft->name + " already produces an event");
        EventAst e = parse_event(p, false);
        if (e.notes || e.unknown) p.fail("'send' takes S -> R : message");
        draft->produces = std::move(e);
        p.expect_end();
      } else if (kw == "notes") {
        if (draft->produces) p.fail("rule " + draft->name + " already produces an event");
        EventAst e;
        e.notes = true;
        e.sender = located_ident(p, "agent");
        if (p.is_sym(":")) p.next();
        e.body = p.term();
        draft->produces = std::move(e);
        p.expect_end();
      } else {
        throw ParseError("unknown rule statement '" + kw + "'", head.line, head.col);
      }
    } else {
      throw ParseError("unexpected '" + kw + "' outside a rule", head.line, head.col);
    }
  }
  flush();
  if (!named) throw ParseError("empty protocol file", 1, 1);
  if (proto.rules.empty()) throw ParseError("protocol " + proto.name + " has no rules", lines.size(), 1);
  return out;
}

Protocol parse_protocol(std::string_view text) { return parse_protocol_file(text).protocol; }

// ---------------------------------------------------------------------------
// Printing patterns and protocols

namespace {

std::string print_key_term(const KeyTerm& k) {
  auto owner = [&]() {
    if (k.owner.is_var()) return k.owner.var;
    return std::string(k.owner.value.is_server() ? "Server"
                       : k.owner.value.is_spy()  ? "Spy"
                                                 : render(k.owner.value));
  };
  switch (k.kind) {
    case KeyTerm::Kind::Var: return k.var;
    case KeyTerm::Kind::Shared: return "shrK(" + owner() + ")";
    case KeyTerm::Kind::Public: return "pubK(" + owner() + ")";
    case KeyTerm::Kind::Private: return "priK(" + owner() + ")";
    case KeyTerm::Kind::Literal: return render(k.literal);
  }
  return "?";
}

bool is_hash_pair(const Pattern& p) {
  return p.kind() == Pattern::Kind::MPair && p.first().kind() == Pattern::Kind::Hash &&
         p.first().first().kind() == Pattern::Kind::MPair &&
         p.first().first().second() == p.second();
}

void print_into(std::string& out, const Pattern& p);

void print_elements(std::string& out, const Pattern& p) {
  const Pattern* cur = &p;
  while (cur->kind() == Pattern::Kind::MPair && !is_hash_pair(*cur)) {
    print_into(out, cur->first());
    out += ", ";
    cur = &cur->second();
  }
  print_into(out, *cur);
}

void print_into(std::string& out, const Pattern& p) {
  using K = Pattern::Kind;
  switch (p.kind()) {
    case K::Literal: {
      const Msg& m = p.literal_value();
      if (m.is(MsgKind::Agent) && m.as_agent().is_server())
        out += "Server";
      else
        out += render(m);
      break;
    }
    case K::Var:
      if (p.var_sort() == Sort::Opaque) out += "?";
      out += p.var_name();
      break;
    case K::AgentRef: out += p.agent_term().is_var() ? p.agent_term().var : render(p.agent_term().value); break;
    case K::KeyRef: out += print_key_term(p.key_term()); break;
    case K::MPair:
      if (is_hash_pair(p)) {
        out += "hash[";
        print_into(out, p.first().first().first());
        out += "] ";
        print_into(out, p.second());
      } else {
        out += "{";
        print_elements(out, p);
        out += "}";
      }
      break;
    case K::Hash:
      out += "hash(";
      print_into(out, p.first());
      out += ")";
      break;
    case K::Crypt:
      out += "{";
      print_elements(out, p.first());
      out += "}_" + print_key_term(p.key_term());
      break;
  }
}

std::string print_agent(const AgentTerm& a) {
  if (a.is_var()) return a.var;
  if (a.value.is_server()) return "Server";
  if (a.value.is_spy()) return "Spy";
  return render(a.value);
}

std::string print_event(const EventPattern& e) {
  if (e.kind == Event::Kind::Notes) return print_agent(e.sender) + " notes " + print_pattern(e.body);
  return std::string(e.unknown_sender ? "?" : "") + print_agent(e.sender) + " -> " +
         print_agent(e.receiver) + " : " + print_pattern(e.body);
}

}  // namespace

std::string print_pattern(const Pattern& p) {
  std::string out;
  print_into(out, p);
  return out;
}

std::string print_protocol(const Protocol& proto) {
  std::ostringstream os;
  os << "protocol " << proto.name << "\n";
  os << "infrastructure " << (proto.infrastructure == Infrastructure::SharedKey ? "shared" : "public")
     << "\n";
  for (const auto& r : proto.rules) {
    os << "\n";
    if (r.action == Rule::Action::ServerRespond) {
      os << "server recursive as " << r.name << "\n";
      continue;
    }
    os << "rule " << r.name << ":\n";
    for (const auto& f : r.fresh)
      os << "  fresh " << (f.kind == FreshDecl::Kind::Nonce ? "nonce " : "key ") << f.var << "\n";
    for (const auto& d : r.distinct)
      os << "  where " << print_agent(d.lhs) << " != " << print_agent(d.rhs) << "\n";
    for (const auto& e : r.premises) os << "  seen " << print_event(e) << "\n";
    if (r.produces.kind == Event::Kind::Notes)
      os << "  notes " << print_agent(r.produces.sender) << " " << print_pattern(r.produces.body) << "\n";
    else
      os << "  send " << print_event(r.produces) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Properties

namespace {

std::vector<Located> ident_list(Parser& p) {
  std::vector<Located> out;
  while (p.peek().kind == Token::Kind::Ident) out.push_back(located_ident(p, "name"));
  if (out.empty()) p.fail("expected at least one name");
  return out;
}

PropertySpec parse_property_tokens(Parser& p) {
  p.expect_word("property");
  Located kind = located_ident(p, "property kind");
  if (p.peek().kind != Token::Kind::String) p.fail("expected a quoted property name");
  PropertySpec spec;
  spec.name = p.next().text;

  // Clause ASTs, interpreted once sorts are known.
  std::vector<std::pair<std::string, EventAst>> events;  // (role, event)
  std::vector<std::pair<std::string, Ast>> terms;        // (role, term)
  std::vector<std::pair<std::string, Located>> names;    // (role, name)

  Sorts s;
  std::vector<Located> plain;

  if (p.is_sym(":")) {
    p.next();
    for (;;) {
      Located word = located_ident(p, "clause");
      std::string w = word.name;
      if (w == "assume") w = "assume " + p.ident("assumption");
      if (w == "assume says" || w == "trigger" || w == "guarantee" || w == "events" || w == "event") {
        if ((w == "trigger" || w == "guarantee" || w == "events" || w == "event")) {
          if (p.is_word("says")) p.next();
        }
        EventAst e = parse_event(p, true);
        scan_event(e, s, plain);
        events.emplace_back(w, std::move(e));
      } else if (w == "assume part" || w == "assume no-oops" || w == "secret" || w == "parts" ||
                 w == "item") {
        Ast a = p.term();
        scan_sorts(a, s, plain);
        terms.emplace_back(w, std::move(a));
      } else if (w == "assume honest" || w == "honest") {
        for (auto& l : ident_list(p)) {
          s.declare(l, Sort::Agent, false);
          names.emplace_back("honest", l);
        }
      } else if (w == "key" || w == "component") {
        Located l = located_ident(p, "variable");
        plain.push_back(l);
        names.emplace_back(w, l);
      } else if (w == "determines") {
        for (auto& l : ident_list(p)) {
          plain.push_back(l);
          names.emplace_back(w, l);
        }
      } else if (w == "iff-bad") {
        Located l = located_ident(p, "agent variable");
        s.declare(l, Sort::Agent, false);
        names.emplace_back(w, l);
      } else {
        throw ParseError("unknown clause '" + w + "'", word.line, word.col);
      }
      if (p.at_end()) break;
      p.expect_sym(";");
      if (p.at_end()) break;
    }
  }
  p.expect_end();
  finish_sorts(s, plain);

  auto evs_with = [&](std::initializer_list<const char*> roles) {
    std::vector<EventPattern> out;
    for (const auto& [r, e] : events)
      for (const char* want : roles)
        if (r == want) out.push_back(to_event(e, s));
    return out;
  };
  auto terms_with = [&](const char* role) {
    std::vector<Pattern> out;
    for (const auto& [r, a] : terms)
      if (r == role) out.push_back(to_pattern(a, s));
    return out;
  };
  auto names_with = [&](const char* role) {
    std::vector<std::string> out;
    for (const auto& [r, l] : names)
      if (r == role) out.push_back(l.name);
    return out;
  };
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) throw ParseError("property \"" + spec.name + "\": " + msg, kind.line, kind.col);
  };

  if (kind.name == "secrecy") {
    Secrecy sec;
    sec.says = evs_with({"assume says"});
    sec.parts = terms_with("assume part");
    sec.honest = names_with("honest");
    sec.no_oops = terms_with("assume no-oops");
    auto targets = terms_with("secret");
    require(targets.size() == 1, "a secrecy property has exactly one 'secret' clause");
    sec.target = targets.front();
    spec.body = sec;
  } else if (kind.name == "agreement") {
    Agreement ag;
    ag.trigger = evs_with({"trigger", "assume says"});
    ag.honest = names_with("honest");
    ag.guarantee = evs_with({"guarantee"});
    require(!ag.trigger.empty() && !ag.guarantee.empty(),
            "an agreement needs 'trigger' and 'guarantee' clauses");
    spec.body = ag;
  } else if (kind.name == "unicity") {
    Unicity u;
    auto parts = terms_with("parts");
    auto evs = evs_with({"events"});
    require(parts.size() + evs.size() == 1, "a unicity property has one 'parts' or 'events' clause");
    if (!parts.empty()) {
      u.source = Unicity::Source::Parts;
      u.container = parts.front();
    } else {
      u.source = Unicity::Source::Events;
      u.event = evs.front();
    }
    auto key = names_with("key");
    require(key.size() == 1, "a unicity property has one 'key' clause");
    u.key = key.front();
    u.determined = names_with("determines");
    u.honest = names_with("honest");
    spec.body = u;
  } else if (kind.name == "regularity") {
    Regularity r;
    auto items = terms_with("item");
    auto agent = names_with("iff-bad");
    require(items.size() == 1 && agent.size() == 1, "regularity needs 'item' and 'iff-bad'");
    r.item = items.front();
    r.agent = agent.front();
    spec.body = r;
  } else if (kind.name == "forwarding") {
    Forwarding f;
    auto evs = evs_with({"event"});
    auto comp = names_with("component");
    require(evs.size() == 1 && comp.size() == 1, "forwarding needs 'event' and 'component'");
    f.event = evs.front();
    f.var = comp.front();
    spec.body = f;
  } else if (kind.name == "session-key-compromise") {
    spec.body = SessionKeyCompromise{};
  } else if (kind.name == "oops-forwarding") {
    spec.body = OopsForwarding{};
  } else {
    throw ParseError("unknown property kind '" + kind.name + "'", kind.line, kind.col);
  }

  auto unbound = unbound_variables(spec);
  require(unbound.empty(), unbound.empty() ? "" : "variable '" + unbound.front() + "' is never bound");
  return spec;
}

}  // namespace

PropertySpec parse_property(std::string_view text) {
  Parser p(lex_line(text, 1));
  return parse_property_tokens(p);
}

}  // namespace inducta
