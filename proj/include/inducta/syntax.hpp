#pragma once

// Concrete syntax: the display grammar for terms and traces, protocol files and
// property declarations.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inducta/property.hpp"

namespace inducta {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

/// Display labels for nonce indices ("Na" in Na#3). Unlabelled nonces print as N#i.
using NonceLabels = std::map<std::uint64_t, std::string>;

std::string render(AgentId a);
std::string render(KeyId k);
std::string render(const Msg& m, const NonceLabels* labels = nullptr);
std::string render(const Event& e, const NonceLabels* labels = nullptr);

/// Parses a ground term in the display grammar; labels seen on nonces are recorded.
Msg parse_msg(std::string_view text, NonceLabels* labels = nullptr);

/// Per-event annotations that are not part of the trace itself.
struct EventNote {
  std::string rule;               // "Fake" for forged events; empty if unknown
  std::optional<AgentId> as;      // the agent a forged message impersonates
  friend bool operator==(const EventNote&, const EventNote&) = default;
};

struct AnnotatedTrace {
  Trace trace;
  std::vector<EventNote> notes;  // oldest first, one per event
  NonceLabels labels;
};

/// Oldest-first numbered lines; Notes events as "oops: Spy notes X".
std::string render_trace(const Trace& evs, const std::vector<EventNote>* notes = nullptr,
                         const NonceLabels* labels = nullptr);
std::string render_trace(const AnnotatedTrace& t);
AnnotatedTrace parse_trace(std::string_view text);

/// A protocol file: the protocol plus any properties declared alongside it.
struct ProtocolFile {
  Protocol protocol;
  std::vector<PropertySpec> properties;
};

ProtocolFile parse_protocol_file(std::string_view text);
Protocol parse_protocol(std::string_view text);
/// Inverse of parse_protocol (up to layout).
std::string print_protocol(const Protocol& p);

/// One `property KIND "name": clause; ...` declaration.
PropertySpec parse_property(std::string_view text);

/// A pattern in protocol-file syntax with sorts inferred from the names used.
Pattern parse_pattern(std::string_view text);
std::string print_pattern(const Pattern& p);

}  // namespace inducta
