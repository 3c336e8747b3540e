#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gahmm/errors.hpp"
#include "gahmm/event_model.hpp"

namespace gahmm {

// How observation tokens are compared against ontology patterns.
//  Exact:    the token itself (whitespace folded to '_').
//  Stripped: the action left after removing ID segments, case-folded.
enum class MatchMode { Exact, Stripped };

std::string_view to_string(MatchMode m);

struct OntologyEntry {
  std::vector<std::string> pattern;
  std::string label;  // display form; may contain spaces
  std::set<std::string> context_tags;
  int layer = 0;

  friend bool operator==(const OntologyEntry&, const OntologyEntry&) = default;
};

struct CatalogOptions {
  std::size_t window = 0;  // 0: taken from the first rule
  MatchMode match = MatchMode::Exact;
  PrefixGrammar grammar;
  std::vector<std::string> extra_symbols;                     // `@vocab`
  std::vector<std::pair<std::string, std::string>> aliases;  // `@alias observed ontology`
};

// Thrown by Catalog's constructor; `entry` indexes the offending rule.
class CatalogError : public ValidationError {
 public:
  CatalogError(std::size_t entry, const std::string& what) : ValidationError(what), entry_(entry) {}
  std::size_t entry() const noexcept { return entry_; }

 private:
  std::size_t entry_;
};

/// An immutable set of ontology rules plus the vocabulary they induce. Every
/// pattern symbol and every label is registered (labels in canonical token
/// form) so a recognized label can be fed back as an observation.
class Catalog {
 public:
  Catalog() = default;
  Catalog(CatalogOptions options, std::vector<OntologyEntry> entries);

  const std::vector<OntologyEntry>& entries() const noexcept { return entries_; }
  const CatalogOptions& options() const noexcept { return options_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t window() const noexcept { return options_.window; }
  MatchMode match_mode() const noexcept { return options_.match; }
  const PrefixGrammar& grammar() const noexcept { return options_.grammar; }
  bool empty() const noexcept { return entries_.empty(); }

  // Token as it is looked up in the vocabulary under this catalog's match mode and aliases.
  std::string canonical(std::string_view token) const;
  Code encode(std::string_view token) const { return vocab_.lookup(canonical(token)); }
  std::vector<Code> encode_pattern(const OntologyEntry& entry) const;

  // Sorted distinct display labels.
  std::vector<std::string> labels() const;
  std::vector<std::string> tags() const;
  // True when some rule for `label` carries `tag` or carries no tags at all.
  bool label_in_context(std::string_view label, std::string_view tag) const;

 private:
  std::string canonical_unaliased(std::string_view token) const;

  CatalogOptions options_;
  std::vector<OntologyEntry> entries_;
  std::map<std::string, std::string> alias_map_;
  Vocabulary vocab_;
};

/// Parses the ontology rule language:
///
///   # comment
///   @window 3
///   @match exact|stripped
///   @entity_ids <regex>      @object_ids <regex>
///   @vocab tok tok ...
///   @alias observed_token ontology_token
///   sym1 - sym2 - sym3 -> Label words @tag @layer=1
///
/// Pattern separators are ` - ` (whitespace on both sides) because symbols
/// and labels may themselves contain hyphens (`Entity-1`, `Loading-1`).
Catalog parse_catalog(std::string_view text);
std::string render_catalog(const Catalog& catalog);

// Cumulative pair weight after `occurrences` sightings with base weight
// `base`: 1 - (1 - base) / 2^(occurrences - 1).
double correlation_wt(double base, int occurrences);

class PairWeightTable {
 public:
  using Pair = std::pair<Code, Code>;

  PairWeightTable() = default;
  PairWeightTable(double base_weight, std::map<Pair, int> counts);

  double base_weight() const noexcept { return base_; }
  int count(Code a, Code b) const;
  // 0 for pairs never adjacent in any pattern.
  double weight(Code a, Code b) const;
  const std::map<Pair, int>& counts() const noexcept { return counts_; }

 private:
  double base_ = 1.0;
  std::map<Pair, int> counts_;
  std::map<Pair, double> cumulative_;
};

// Counts ordered adjacent pairs over all patterns; base weight 1/(L-1).
PairWeightTable build_pair_weights(const Catalog& catalog);

}  // namespace gahmm
