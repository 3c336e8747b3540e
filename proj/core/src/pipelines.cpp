#include "gahmm/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "gahmm/errors.hpp"

namespace gahmm {

char to_char(Architecture a) {
  switch (a) {
    case Architecture::Concatenated: return 'N';
    case Architecture::Cascaded: return 'C';
    case Architecture::Hybrid: return 'H';
  }
  return '?';
}

std::optional<Architecture> architecture_from(std::string_view s) {
  if (s == "N" || s == "concatenated") return Architecture::Concatenated;
  if (s == "C" || s == "cascaded") return Architecture::Cascaded;
  if (s == "H" || s == "hybrid") return Architecture::Hybrid;
  return std::nullopt;
}

double AcceptanceFloor::threshold(std::size_t symbols, std::size_t length) const {
  switch (kind) {
    case Kind::Uniform: return uniform_log_likelihood(symbols, length);
    case Kind::Fixed: return value;
    case Kind::Unreachable: return std::numeric_limits<double>::infinity();
  }
  return value;
}

Stream make_stream(std::span<const ObservationEvent> events) {
  Stream s;
  s.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) s.push_back({events[i].token, {i}, events[i].confidence, false});
  return s;
}

std::vector<std::string> tokens_of(const Stream& stream) {
  std::vector<std::string> out;
  out.reserve(stream.size());
  for (const auto& item : stream) out.push_back(item.token);
  return out;
}

LayerConfig make_layer(Catalog catalog, ModelBank bank) {
  LayerConfig layer;
  layer.windowing.width = catalog.window();
  layer.catalog = std::move(catalog);
  layer.bank = std::move(bank);
  return layer;
}

void LayerStack::validate() const {
  if (layers.empty()) throw ConfigError("layer stack is empty");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    const auto where = "layer " + std::to_string(k + 1) + ": ";
    if (layer.catalog.empty()) throw ConfigError(where + "empty catalog");
    if (layer.windowing.kind != WindowCase::Fixed && layer.windowing.width != layer.catalog.window()) {
      throw ConfigError(where + "window width " + std::to_string(layer.windowing.width) +
                        " differs from the catalog pattern length " + std::to_string(layer.catalog.window()));
    }
    std::vector<std::string> bank_labels;
    for (const auto& [label, model] : layer.bank.per_class) bank_labels.push_back(label);
    if (bank_labels != layer.catalog.labels()) throw ConfigError(where + "model bank does not match its catalog");
    if (layer.filters.correlation && layer.catalog.window() < 2) {
      throw ConfigError(where + "correlation selection needs patterns of length >= 2");
    }
    if (!(layer.min_confidence >= 0.0 && layer.min_confidence <= 1.0)) {
      throw ConfigError(where + "min_confidence must lie in [0,1]");
    }
    if (layer.max_passes < 1) throw ConfigError(where + "max_passes must be >= 1");
    if (layer.architecture == Architecture::Hybrid) {
      throw ConfigError(where + "a layer runs N or C; hybrid applies to the whole stack");
    }
    layer.filters.validate();
    if (k == 0) continue;
    for (const auto& label : layers[k - 1].catalog.labels()) {
      if (!layer.catalog.vocab().find(layer.catalog.canonical(label))) {
        throw ConfigError(where + "vocabulary lacks label '" + label + "' emitted by layer " + std::to_string(k));
      }
    }
  }
}

std::string Trace::str() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double normalized_confidence(double ll, double best) {
  if (!std::isfinite(ll) || !std::isfinite(best)) return 0.0;
  return std::clamp(std::exp(ll - best), std::numeric_limits<double>::min(), 1.0);
}

std::vector<Code> encode_stream(const Stream& s, const Catalog& catalog) {
  std::vector<Code> out;
  out.reserve(s.size());
  for (const auto& item : s) out.push_back(catalog.encode(item.token));
  return out;
}

std::string join_tokens(const Stream& s, std::span<const std::size_t> positions) {
  std::string out;
  for (auto p : positions) {
    if (!out.empty()) out += ' ';
    out += s[p].token;
  }
  return out;
}

std::string join_all(const Stream& s) {
  std::string out;
  for (const auto& item : s) {
    if (!out.empty()) out += ' ';
    out += item.token;
  }
  return out;
}

std::vector<std::size_t> merged_sources(const Stream& s, std::span<const std::size_t> positions) {
  std::set<std::size_t> all;
  for (auto p : positions) all.insert(s[p].sources.begin(), s[p].sources.end());
  return {all.begin(), all.end()};
}

Window contiguous_window(std::span<const Code> codes, std::size_t start, std::size_t width) {
  Window w;
  for (std::size_t i = start; i < start + width; ++i) {
    w.positions.push_back(i);
    w.codes.push_back(codes[i]);
  }
  w.start = start;
  w.end = start + width - 1;
  return w;
}

// Window selection shared by the N and C pipelines.
class WindowSource {
 public:
  explicit WindowSource(const LayerConfig& layer) : layer_(layer) {
    if (layer.filters.correlation) {
      table_ = build_pair_weights(layer.catalog);
      threshold_ = layer.filters.correlation_threshold.value_or(table_.base_weight());
    }
  }

  Window at(std::span<const Code> codes, std::size_t start, std::size_t width) const {
    if (layer_.filters.correlation && width >= 2) {
      return correlated_window(codes, table_, threshold_, width, start);
    }
    return contiguous_window(codes, start, width);
  }

 private:
  const LayerConfig& layer_;
  PairWeightTable table_;
  double threshold_ = 1.0;
};

void trace_window(const RunContext& ctx, const Stream& s, const Window& w, const WindowDecision& d, double floor) {
  if (!ctx.trace) return;
  std::string line = "window [" + std::to_string(w.start) + ".." + std::to_string(w.end) + "] " +
                     join_tokens(s, w.positions);
  if (w.substituted) line += " (correlation-substituted)";
  if (w.flagged) line += " (correlation-flagged)";
  ctx.trace->note(line);
  ctx.trace->push();
  std::string scores = "scores:";
  for (const auto& sc : d.scores) scores += " " + sc.label + "=" + fmt(sc.log_likelihood);
  ctx.trace->note(scores);
  if (d.label.empty()) {
    ctx.trace->note("no admissible label -> rejected");
  } else {
    ctx.trace->note("best " + d.label + " " + fmt(d.log_likelihood) + " (floor " + fmt(floor) + ", confidence " +
                    fmt(d.confidence) + ") -> " + (d.accepted ? "accepted" : "rejected"));
  }
  ctx.trace->pop();
}

RecognitionResult make_result(const WindowDecision& d, const Window& w, const Stream& s, const LayerConfig& layer,
                              const RunContext& ctx, const std::vector<std::string>& applied) {
  RecognitionResult r;
  r.label = d.label;
  r.log_likelihood = d.log_likelihood;
  r.confidence = d.confidence;
  r.span_start = w.start;
  r.span_end = w.end;
  r.sources = merged_sources(s, w.positions);
  r.layer = ctx.layer;
  r.architecture = ctx.context.empty() ? layer.architecture : Architecture::Hybrid;
  r.context = ctx.context;
  r.provenance = applied;
  if (r.architecture == Architecture::Hybrid) r.provenance.push_back(std::string("layer-architecture=") + to_char(layer.architecture));
  if (layer.decoder == Decoder::LabelState) r.provenance.emplace_back("label-state-decoder");
  if (w.substituted) r.provenance.emplace_back("correlation-substituted");
  if (w.flagged) r.provenance.emplace_back("correlation-flagged");
  return r;
}

std::vector<RecognitionResult> nhmm_impl(const Stream& s, const LayerConfig& layer, const RunContext& ctx,
                                         const std::vector<std::string>& applied) {
  std::vector<RecognitionResult> out;
  const auto codes = encode_stream(s, layer.catalog);
  const auto n = codes.size();
  auto policy = layer.windowing;
  if (policy.kind == WindowCase::Fixed) policy.width = n;
  if (n == 0 || n < policy.width) {
    if (ctx.trace) {
      ctx.trace->note("stream of " + std::to_string(n) + " events is shorter than window " +
                      std::to_string(policy.width) + "; no windows");
    }
    return out;
  }

  const auto count = window_count(n, policy);
  const auto stride = policy.kind == WindowCase::Flooring ? policy.width : 1;
  if (ctx.trace) {
    ctx.trace->note("windows: " + std::to_string(count) + " (" + std::string(to_string(policy.kind)) +
                    ", n=" + std::to_string(n) + ", w=" + std::to_string(policy.width) + ")");
    if (const auto left = unconsumed_count(n, policy); left > 0) {
      ctx.trace->note("unconsumed trailing events: " + std::to_string(left));
    }
  }
  const WindowSource source(layer);
  const double floor = layer.floor.threshold(layer.catalog.vocab().size(), policy.width);
  for (std::size_t k = 0; k < count; ++k) {
    const auto w = source.at(codes, k * stride, policy.width);
    const auto d = decode_window(layer, w.codes, ctx.tag);
    trace_window(ctx, s, w, d, floor);
    if (d.accepted) out.push_back(make_result(d, w, s, layer, ctx, applied));
  }
  return out;
}

CascadeOutput chmm_impl(Stream s, const LayerConfig& layer, const RunContext& ctx,
                        const std::vector<std::string>& applied) {
  CascadeOutput out;
  const bool fixed = layer.windowing.kind == WindowCase::Fixed;
  const auto stride = layer.windowing.kind == WindowCase::Flooring ? layer.windowing.width : 1;
  const WindowSource source(layer);

  for (std::size_t pass = 1; pass <= layer.max_passes; ++pass) {
    const auto width = fixed ? s.size() : layer.windowing.width;
    if (ctx.trace) {
      ctx.trace->note("pass " + std::to_string(pass) + ": stream(" + std::to_string(s.size()) + ") " + join_all(s));
      ctx.trace->push();
    }
    bool substituted = false;
    std::size_t pos = 0;
    auto codes = encode_stream(s, layer.catalog);
    while (width > 0 && pos + width <= s.size()) {
      const auto w = source.at(codes, pos, width);
      const auto d = decode_window(layer, w.codes, ctx.tag);
      trace_window(ctx, s, w, d, layer.floor.threshold(layer.catalog.vocab().size(), width));
      if (!d.accepted) {
        pos += stride;
        continue;
      }
      auto result = make_result(d, w, s, layer, ctx, applied);
      result.provenance.emplace_back("cascade-substitution");
      StreamItem label_item{d.label, result.sources, 1.0, true};
      for (auto it = w.positions.rbegin(); it != w.positions.rend(); ++it) {
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(*it));
        codes.erase(codes.begin() + static_cast<std::ptrdiff_t>(*it));
      }
      codes.insert(codes.begin() + static_cast<std::ptrdiff_t>(w.positions.front()),
                   layer.catalog.encode(label_item.token));
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(w.positions.front()), std::move(label_item));
      if (ctx.trace) {
        ctx.trace->note("substitute " + d.label + " at " + std::to_string(w.positions.front()) + " -> stream(" +
                        std::to_string(s.size()) + ") " + join_all(s));
      }
      out.results.push_back(std::move(result));
      substituted = true;
      if (width == 1) ++pos;  // a one-symbol window would match its own label forever
    }
    if (ctx.trace) ctx.trace->pop();
    // Only a shrinking stream can expose new windows.
    if (!substituted || fixed || width < 2) break;
  }
  if (ctx.trace) ctx.trace->note("final stream(" + std::to_string(s.size()) + ") " + join_all(s));
  out.stream = std::move(s);
  return out;
}

Stream stream_from_codes(std::span<const Code> codes, const Vocabulary& vocab) {
  Stream s;
  s.reserve(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) s.push_back({vocab.name(codes[i]), {i}, 1.0, false});
  return s;
}

void merge_into(std::vector<std::size_t>& dst, const std::vector<std::size_t>& src) {
  std::vector<std::size_t> merged;
  std::set_union(dst.begin(), dst.end(), src.begin(), src.end(), std::back_inserter(merged));
  dst = std::move(merged);
}

}  // namespace

WindowDecision decode_window(const LayerConfig& layer, std::span<const Code> codes,
                             const std::optional<std::string>& tag) {
  WindowDecision d;
  const auto len = codes.size();
  if (layer.decoder == Decoder::PerClass) {
    d.scores = score_all(layer.bank, codes);
    const LabelScore* best = nullptr;
    for (const auto& sc : d.scores) {
      if (tag && !layer.catalog.label_in_context(sc.label, *tag)) continue;
      if (!best || sc.log_likelihood > best->log_likelihood) best = &sc;
    }
    if (!best) return d;
    d.label = best->label;
    d.log_likelihood = best->log_likelihood;
    d.confidence = normalized_confidence(
        d.log_likelihood, best_possible_log_likelihood(layer.bank.per_class.at(d.label), len));
  } else {
    const auto& model = layer.bank.label_state;
    const auto v = viterbi(model, codes);
    d.label = model.state_labels.at(v.path.back());
    d.log_likelihood = v.log_score;
    d.scores.push_back({d.label, d.log_likelihood});
    d.confidence = normalized_confidence(d.log_likelihood, best_possible_log_likelihood(model, len));
    if (tag && !layer.catalog.label_in_context(d.label, *tag)) return d;
  }
  const double floor = layer.floor.threshold(layer.catalog.vocab().size(), len);
  d.accepted = std::isfinite(d.log_likelihood) && d.log_likelihood > floor && d.confidence >= layer.min_confidence;
  return d;
}

std::vector<RecognitionResult> run_nhmm(const Stream& stream, const LayerConfig& layer, const RunContext& ctx) {
  return nhmm_impl(stream, layer, ctx, {});
}

std::vector<RecognitionResult> run_nhmm(std::span<const Code> codes, const LayerConfig& layer) {
  return nhmm_impl(stream_from_codes(codes, layer.catalog.vocab()), layer, {}, {});
}

CascadeOutput run_chmm(Stream stream, const LayerConfig& layer, const RunContext& ctx) {
  return chmm_impl(std::move(stream), layer, ctx, {});
}

std::pair<std::vector<Code>, std::vector<RecognitionResult>> run_chmm(std::span<const Code> codes,
                                                                      const LayerConfig& layer,
                                                                      std::size_t max_passes) {
  if (max_passes < 1) throw DomainError("max_passes must be >= 1");
  auto config = layer;
  config.max_passes = max_passes;
  auto out = chmm_impl(stream_from_codes(codes, layer.catalog.vocab()), config, {}, {});
  return {encode_stream(out.stream, layer.catalog), std::move(out.results)};
}

LayerOutput run_layer(const Stream& stream, const LayerConfig& layer, const RunContext& ctx) {
  LayerOutput out;
  std::vector<std::string> applied;
  Trace* trace = ctx.trace;
  const auto& catalog = layer.catalog;
  if (trace) {
    trace->note("layer " + std::to_string(ctx.layer) + " [" + to_char(layer.architecture) + ", " +
                std::string(to_string(layer.windowing.kind)) + " w=" + std::to_string(layer.windowing.width) +
                ", " + (layer.decoder == Decoder::PerClass ? "per-class" : "label-state") + ", " +
                std::string(to_string(catalog.match_mode())) + " matching]");
    trace->push();
    trace->note("input: " + std::to_string(stream.size()) + " events");
  }

  Stream s;
  s.reserve(stream.size());
  for (const auto& item : stream) {
    if (item.confidence < layer.filters.confidence_floor) {
      if (trace) {
        trace->note("confidence filter: removed " + item.token + " (confidence " + fmt(item.confidence) + " < " +
                    fmt(layer.filters.confidence_floor) + ")");
      }
      continue;
    }
    s.push_back(item);
  }
  if (s.size() != stream.size()) applied.emplace_back("confidence-filter");

  if (!layer.filters.frequency_rules.empty()) {
    Vocabulary local;
    std::vector<FrequencyRule> rules;
    for (const auto& r : layer.filters.frequency_rules) {
      rules.push_back({catalog.canonical(r.symbol_a), catalog.canonical(r.symbol_b), r.label_if_a_dominant,
                       r.label_if_b_dominant, r.min_margin});
      local.add(rules.back().symbol_a);
      local.add(rules.back().symbol_b);
    }
    std::vector<std::string> canon;
    for (const auto& item : s) canon.push_back(catalog.canonical(item.token));
    for (const auto& c : canon) local.add(c);
    local.finalize();
    std::vector<Code> codes;
    for (const auto& c : canon) codes.push_back(local.lookup(c));
    out.frequency = frequency_disparity(codes, rules, local);
    if (trace) {
      for (const auto& f : out.frequency) trace->note("frequency: " + f.label + " (margin " + std::to_string(f.margin) + ")");
    }
  }

  std::set<std::string> trivial;
  for (const auto& t : layer.filters.trivial_symbols) trivial.insert(catalog.canonical(t));
  if (!trivial.empty() || layer.filters.distinct) {
    Stream kept;
    std::string last;
    bool removed = false;
    bool collapsed = false;
    for (auto& item : s) {
      const auto canon = catalog.canonical(item.token);
      if (trivial.count(canon)) {
        if (trace) trace->note("trivial filter: removed " + item.token);
        removed = true;
        continue;
      }
      if (layer.filters.distinct && !kept.empty() && canon == last) {
        if (trace) trace->note("distinct filter: merged repeat " + item.token);
        merge_into(kept.back().sources, item.sources);
        collapsed = true;
        continue;
      }
      last = canon;
      kept.push_back(std::move(item));
    }
    s = std::move(kept);
    if (removed) applied.emplace_back("trivial-filter");
    if (collapsed) applied.emplace_back("distinct-filter");
  }
  out.input = s;

  if (layer.architecture == Architecture::Concatenated) {
    out.results = nhmm_impl(s, layer, ctx, applied);
    out.output = std::move(s);
  } else {
    auto c = chmm_impl(std::move(s), layer, ctx, applied);
    out.results = std::move(c.results);
    out.output = std::move(c.stream);
  }
  if (trace) trace->pop();
  return out;
}

std::vector<LayerOutput> run_layer_stack(const Stream& stream, const LayerStack& stack, const RunContext& ctx) {
  stack.validate();
  std::vector<LayerOutput> outputs;
  const Stream* current = &stream;
  for (std::size_t k = 0; k < stack.layers.size(); ++k) {
    auto layer_ctx = ctx;
    layer_ctx.layer = static_cast<int>(k + 1);
    outputs.push_back(run_layer(*current, stack.layers[k], layer_ctx));
    current = &outputs.back().output;
  }
  return outputs;
}

std::vector<LayerOutput> run_layer_stack(std::span<const ObservationEvent> events, const LayerStack& stack,
                                         const RunContext& ctx) {
  return run_layer_stack(make_stream(events), stack, ctx);
}

ContextPartition partition_contexts(std::span<const ObservationEvent> events, ContextMode mode,
                                    const Catalog* catalog, const std::vector<std::string>& tags) {
  ContextPartition part;
  if (mode == ContextMode::PerEntity) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> lifespan;
    for (std::size_t i = 0; i < events.size(); ++i) {
      for (const auto& id : events[i].entity_ids) {
        auto [it, inserted] = lifespan.emplace(id, std::make_pair(i, i));
        if (!inserted) it->second.second = i;
      }
    }
    if (lifespan.empty()) {
      if (events.empty()) return part;
      throw ConfigError("per-entity contexts need events that carry entity IDs; use by_tag contexts instead");
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
      std::set<std::string> targets(events[i].entity_ids.begin(), events[i].entity_ids.end());
      if (targets.empty()) {
        for (const auto& [id, span] : lifespan) {
          if (span.first <= i && i <= span.second) targets.insert(id);
        }
        if (targets.empty()) {
          for (const auto& [id, span] : lifespan) targets.insert(id);
        }
      }
      for (const auto& id : targets) part.contexts[id].push_back(i);
    }
    return part;
  }

  if (!catalog) throw ConfigError("by_tag contexts need a catalog");
  const auto known = catalog->tags();
  if (known.empty() && tags.empty()) {
    auto& all = part.contexts["all"];
    for (std::size_t i = 0; i < events.size(); ++i) all.push_back(i);
    return part;
  }
  const auto selected = tags.empty() ? known : tags;
  for (const auto& tag : selected) {
    if (std::find(known.begin(), known.end(), tag) == known.end()) {
      throw ConfigError("context tag '" + tag + "' does not occur in the catalog");
    }
    std::set<std::string> symbols;
    for (const auto& e : catalog->entries()) {
      if (!e.context_tags.empty() && !e.context_tags.count(tag)) continue;
      for (const auto& sym : e.pattern) symbols.insert(catalog->canonical(sym));
      symbols.insert(catalog->canonical(e.label));
    }
    auto& ctx = part.contexts[tag];
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (symbols.count(catalog->canonical(events[i].token))) ctx.push_back(i);
    }
  }
  return part;
}

std::map<std::string, std::vector<RecognitionResult>> HybridOutput::results() const {
  std::map<std::string, std::vector<RecognitionResult>> out;
  for (const auto& [key, layers] : contexts) {
    auto& dst = out[key];
    for (const auto& l : layers) dst.insert(dst.end(), l.results.begin(), l.results.end());
  }
  return out;
}

HybridOutput run_hhmm(std::span<const ObservationEvent> events, const LayerStack& stack, ContextMode mode,
                      const std::vector<std::string>& tags, Trace* trace) {
  stack.validate();
  HybridOutput out;
  out.partition = partition_contexts(events, mode, &stack.layers.front().catalog, tags);
  for (const auto& [key, indices] : out.partition.contexts) {
    Stream s;
    s.reserve(indices.size());
    for (auto i : indices) s.push_back({events[i].token, {i}, events[i].confidence, false});
    RunContext ctx;
    ctx.context = key;
    if (mode == ContextMode::ByTag && key != "all") ctx.tag = key;
    ctx.trace = trace;
    if (trace) {
      trace->note("context " + key + ": " + std::to_string(indices.size()) + " events");
      trace->push();
    }
    out.contexts.emplace(key, run_layer_stack(s, stack, ctx));
    if (trace) trace->pop();
  }
  return out;
}

RecognitionResult ml_fuse(std::span<const RecognitionResult> results) {
  if (results.empty()) throw DomainError("nothing to fuse");
  const RecognitionResult* best = &results.front();
  for (const auto& r : results.subspan(1)) {
    if (r.log_likelihood > best->log_likelihood ||
        (r.log_likelihood == best->log_likelihood &&
         (r.span_start < best->span_start || (r.span_start == best->span_start && r.label < best->label)))) {
      best = &r;
    }
  }
  return *best;
}

}  // namespace gahmm
