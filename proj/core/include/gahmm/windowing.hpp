#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gahmm/event_model.hpp"
#include "gahmm/ontology_catalog.hpp"

namespace gahmm {

// How an observed sequence of n events is cut into HMM inputs of width w.
enum class WindowCase {
  Fixed,     // the whole sequence is one input (n == w)
  Flooring,  // floor(n / w) disjoint windows from the front
  Sliding,   // n - w + 1 overlapping windows, stride 1
};

std::string_view to_string(WindowCase c);

struct WindowingPolicy {
  WindowCase kind = WindowCase::Sliding;
  std::size_t width = 3;
};

struct Window {
  std::vector<Code> codes;
  std::vector<std::size_t> positions;  // source index of each code
  std::size_t start = 0;               // first source index
  std::size_t end = 0;                 // last source index (inclusive)
  bool substituted = false;            // correlation selection replaced a member
  bool flagged = false;                // a weak pair had no stronger alternative

  friend bool operator==(const Window&, const Window&) = default;
};

std::vector<Window> generate_windows(std::span<const Code> codes, WindowingPolicy policy);

// Number of windows generate_windows produces, and trailing events it leaves unused.
std::size_t window_count(std::size_t n, WindowingPolicy policy);
std::size_t unconsumed_count(std::size_t n, WindowingPolicy policy);

std::vector<ObservationEvent> filter_confidence(std::span<const ObservationEvent> events, double floor);

// Drops trivial codes, then (when `collapse_repeats`) keeps one of each run of equal codes.
std::vector<Code> filter_trivial(std::span<const Code> codes, const std::set<Code>& trivial,
                                 bool collapse_repeats = true);

/// Sliding windows in which every adjacent pair is checked against the
/// catalog's cumulative pair weights. When a pair falls below `threshold`,
/// the later event is replaced by the succeeding event that pairs with the
/// earlier one at maximum weight (ties: the nearest). If nothing beats the
/// original pair, it is kept and the window is flagged.
std::vector<Window> correlation_select(std::span<const Code> codes, const PairWeightTable& table, double threshold,
                                       std::size_t width);

// The single correlation-selected window beginning at `start`.
Window correlated_window(std::span<const Code> codes, const PairWeightTable& table, double threshold,
                         std::size_t width, std::size_t start);

// "If A dominates B by at least min_margin occurrences, the stream shows label_if_a_dominant."
struct FrequencyRule {
  std::string symbol_a;
  std::string symbol_b;
  std::string label_if_a_dominant;
  std::string label_if_b_dominant;
  int min_margin = 1;

  friend bool operator==(const FrequencyRule&, const FrequencyRule&) = default;
};

struct FrequencyFinding {
  std::string label;
  long margin = 0;

  friend bool operator==(const FrequencyFinding&, const FrequencyFinding&) = default;
};

// Counts the rule symbols (as codes) in `codes`; emits one finding per rule whose margin is reached.
std::vector<FrequencyFinding> frequency_disparity(std::span<const Code> codes,
                                                  std::span<const FrequencyRule> rules,
                                                  const Vocabulary& vocab);

struct FilterConfig {
  double confidence_floor = 0.0;
  std::set<std::string> trivial_symbols;
  bool distinct = false;  // collapse immediate repeats
  bool correlation = false;
  std::optional<double> correlation_threshold;  // defaults to the catalog's base weight
  std::vector<FrequencyRule> frequency_rules;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

}  // namespace gahmm
