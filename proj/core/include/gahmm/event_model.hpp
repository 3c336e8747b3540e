#pragma once

#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gahmm {

using Code = std::uint32_t;

struct ObservationSymbol {
  std::string name;
  Code index = 0;

  friend bool operator==(const ObservationSymbol&, const ObservationSymbol&) = default;
};

// One annotated atomic action. `token` keeps the prefixed form as recorded
// (e.g. `H3_O2_Giving_H2`); the ID lists are derived from it.
struct ObservationEvent {
  std::string token;
  std::vector<std::string> entity_ids;
  std::vector<std::string> object_ids;
  std::int64_t timestamp = 0;
  double confidence = 1.0;

  friend bool operator==(const ObservationEvent&, const ObservationEvent&) = default;
};

/// Dense string <-> index mapping over observation names. Index 0 is the
/// reserved out-of-vocabulary symbol. Once finalized the vocabulary is
/// immutable and can be shared freely across threads.
class Vocabulary {
 public:
  static constexpr Code kOov = 0;
  static constexpr std::string_view kOovName = "<oov>";

  Vocabulary();

  // Registers `name` (or returns its existing index). Throws std::logic_error
  // after finalize() and ValidationError for empty or whitespace-bearing names.
  Code add(std::string_view name);
  void finalize() noexcept { finalized_ = true; }
  bool finalized() const noexcept { return finalized_; }

  std::optional<Code> find(std::string_view name) const;
  // Unregistered names map to kOov.
  Code lookup(std::string_view name) const;
  const std::string& name(Code index) const;
  ObservationSymbol symbol(Code index) const { return {name(index), index}; }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  // FNV-1a over the ordered symbol names; identifies a vocabulary layout.
  std::uint64_t hash() const noexcept;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Code> index_;
  bool finalized_ = false;
};

std::vector<Code> encode(std::span<const ObservationEvent> events, const Vocabulary& vocab);

/// Grammar for the ID segments of underscore-joined tokens. Leading segments
/// matching either pattern are IDs, as are trailing segments (recipients).
class PrefixGrammar {
 public:
  static constexpr std::string_view kDefaultEntityPattern = R"((?:H|P|V|Entity-)\d+)";
  static constexpr std::string_view kDefaultObjectPattern = R"(O\d+)";

  PrefixGrammar();
  PrefixGrammar(std::string entity_pattern, std::string object_pattern);

  bool is_entity(std::string_view segment) const;
  bool is_object(std::string_view segment) const;
  const std::string& entity_pattern() const noexcept { return entity_src_; }
  const std::string& object_pattern() const noexcept { return object_src_; }
  bool is_default() const noexcept;

  friend bool operator==(const PrefixGrammar& a, const PrefixGrammar& b) {
    return a.entity_src_ == b.entity_src_ && a.object_src_ == b.object_src_;
  }

 private:
  std::string entity_src_;
  std::string object_src_;
  std::regex entity_;
  std::regex object_;
};

struct StrippedToken {
  std::string action;
  std::vector<std::string> entity_ids;
  std::vector<std::string> object_ids;

  friend bool operator==(const StrippedToken&, const StrippedToken&) = default;
};

// `H3_O2_Giving_H2` -> {Giving, [H3, H2], [O2]}. Tokens with no ID segments,
// or made only of ID segments, pass through unchanged.
StrippedToken strip_ids(std::string_view token, const PrefixGrammar& grammar = PrefixGrammar());
StrippedToken strip_ids(const ObservationEvent& event, const PrefixGrammar& grammar = PrefixGrammar());

// Fills entity_ids/object_ids of each event from its token.
void annotate_ids(std::vector<ObservationEvent>& events, const PrefixGrammar& grammar = PrefixGrammar());

/// Parses an event stream. Two layouts are accepted:
///  - line records `timestamp<TAB>token<TAB>confidence`, where timestamp and
///    confidence are optional (defaults: 1-based line number, 1.0);
///  - a compact bracketed array `[tok,tok,...]` (timestamps are 1-based positions).
/// Blank lines and lines starting with `#` are skipped in the line layout.
std::vector<ObservationEvent> parse_event_stream(std::string_view text,
                                                 const PrefixGrammar& grammar = PrefixGrammar());

// Writes the line layout with every field present; parse_event_stream reads it back exactly.
std::string serialize_event_stream(std::span<const ObservationEvent> events);

// Whitespace runs become single underscores: "Placing Object on floor" -> "Placing_Object_on_floor".
std::string to_token(std::string_view text);

}  // namespace gahmm
