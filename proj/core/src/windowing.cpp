#include "gahmm/windowing.hpp"

#include <algorithm>
#include <cstdlib>

#include "gahmm/errors.hpp"

namespace gahmm {

std::string_view to_string(WindowCase c) {
  switch (c) {
    case WindowCase::Fixed: return "fixed";
    case WindowCase::Flooring: return "flooring";
    case WindowCase::Sliding: return "sliding";
  }
  return "?";
}

namespace {

Window contiguous(std::span<const Code> codes, std::size_t start, std::size_t width) {
  Window w;
  w.codes.assign(codes.begin() + static_cast<std::ptrdiff_t>(start),
                 codes.begin() + static_cast<std::ptrdiff_t>(start + width));
  w.positions.resize(width);
  for (std::size_t i = 0; i < width; ++i) w.positions[i] = start + i;
  w.start = start;
  w.end = start + width - 1;
  return w;
}

void check_policy(std::size_t n, WindowingPolicy policy) {
  if (n == 0) throw DomainError("cannot window an empty sequence");
  if (policy.width == 0) throw DomainError("window width must be >= 1");
  if (policy.kind == WindowCase::Fixed && n != policy.width) {
    throw DomainError("fixed windowing needs n == w (n = " + std::to_string(n) + ", w = " +
                      std::to_string(policy.width) + ")");
  }
  if (policy.width > n) {
    throw DomainError("window width " + std::to_string(policy.width) + " exceeds sequence length " +
                      std::to_string(n));
  }
}

}  // namespace

std::size_t window_count(std::size_t n, WindowingPolicy policy) {
  check_policy(n, policy);
  switch (policy.kind) {
    case WindowCase::Fixed: return 1;
    case WindowCase::Flooring: return n / policy.width;
    case WindowCase::Sliding: return n - policy.width + 1;
  }
  return 0;
}

std::size_t unconsumed_count(std::size_t n, WindowingPolicy policy) {
  check_policy(n, policy);
  return policy.kind == WindowCase::Flooring ? n % policy.width : 0;
}

std::vector<Window> generate_windows(std::span<const Code> codes, WindowingPolicy policy) {
  const auto n = codes.size();
  const auto count = window_count(n, policy);
  const auto stride = policy.kind == WindowCase::Flooring ? policy.width : 1;
  std::vector<Window> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(contiguous(codes, k * stride, policy.width));
  return out;
}

std::vector<ObservationEvent> filter_confidence(std::span<const ObservationEvent> events, double floor) {
  if (!(floor >= 0.0 && floor <= 1.0)) throw DomainError("confidence floor must lie in [0,1]");
  std::vector<ObservationEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [floor](const ObservationEvent& e) { return e.confidence >= floor; });
  return out;
}

std::vector<Code> filter_trivial(std::span<const Code> codes, const std::set<Code>& trivial, bool collapse_repeats) {
  std::vector<Code> out;
  out.reserve(codes.size());
  for (auto c : codes) {
    if (trivial.count(c)) continue;
    if (collapse_repeats && !out.empty() && out.back() == c) continue;
    out.push_back(c);
  }
  return out;
}

Window correlated_window(std::span<const Code> codes, const PairWeightTable& table, double threshold,
                         std::size_t width, std::size_t start) {
  const auto n = codes.size();
  if (width == 0 || start + width > n) throw DomainError("window does not fit in the sequence");
  Window w;
  w.positions.push_back(start);
  for (std::size_t slot = 1; slot < width; ++slot) {
    const auto prev = w.positions.back();
    const auto still_needed = width - 1 - slot;
    auto chosen = prev + 1;
    const double original = table.weight(codes[prev], codes[chosen]);
    if (original < threshold) {
      double best = original;
      for (auto q = prev + 2; q + still_needed < n; ++q) {
        const double wq = table.weight(codes[prev], codes[q]);
        if (wq > best) {
          best = wq;
          chosen = q;
        }
      }
      if (chosen != prev + 1) w.substituted = true;
      else w.flagged = true;
    }
    w.positions.push_back(chosen);
  }
  for (auto p : w.positions) w.codes.push_back(codes[p]);
  w.start = w.positions.front();
  w.end = w.positions.back();
  return w;
}

std::vector<Window> correlation_select(std::span<const Code> codes, const PairWeightTable& table, double threshold,
                                       std::size_t width) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("correlation threshold must lie in (0,1]");
  const auto n = codes.size();
  check_policy(n, {WindowCase::Sliding, width});
  std::vector<Window> out;
  out.reserve(n - width + 1);
  for (std::size_t start = 0; start + width <= n; ++start) {
    out.push_back(correlated_window(codes, table, threshold, width, start));
  }
  return out;
}

std::vector<FrequencyFinding> frequency_disparity(std::span<const Code> codes,
                                                  std::span<const FrequencyRule> rules,
                                                  const Vocabulary& vocab) {
  std::vector<FrequencyFinding> out;
  for (const auto& rule : rules) {
    const auto a = vocab.find(rule.symbol_a);
    const auto b = vocab.find(rule.symbol_b);
    const long count_a = a ? std::count(codes.begin(), codes.end(), *a) : 0;
    const long count_b = b ? std::count(codes.begin(), codes.end(), *b) : 0;
    const long margin = std::labs(count_a - count_b);
    if (margin == 0 || margin < rule.min_margin) continue;
    out.push_back({count_a > count_b ? rule.label_if_a_dominant : rule.label_if_b_dominant, margin});
  }
  return out;
}

void FilterConfig::validate() const {
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) {
    throw ConfigError("confidence floor must lie in [0,1]");
  }
  if (correlation_threshold && !(*correlation_threshold > 0.0 && *correlation_threshold <= 1.0)) {
    throw ConfigError("correlation threshold must lie in (0,1]");
  }
  for (const auto& r : frequency_rules) {
    if (r.min_margin < 1) throw ConfigError("frequency rule margin must be >= 1");
  }
}

}  // namespace gahmm
