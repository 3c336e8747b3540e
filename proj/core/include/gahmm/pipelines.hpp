#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gahmm/event_model.hpp"
#include "gahmm/hmm.hpp"
#include "gahmm/ontology_catalog.hpp"
#include "gahmm/windowing.hpp"

namespace gahmm {

enum class Architecture {
  Concatenated,  // N: windows scored independently
  Cascaded,      // C: recognized labels substituted back into the stream
  Hybrid,        // H: stream partitioned by context, each part run on its own
};

char to_char(Architecture a);
std::optional<Architecture> architecture_from(std::string_view s);

enum class Decoder {
  PerClass,    // argmax over per-label forward scores
  LabelState,  // Viterbi over the label-state model; final state wins
};

enum class ContextMode { PerEntity, ByTag };

// Minimum log-likelihood a window's best label must exceed to be recognized.
struct AcceptanceFloor {
  enum class Kind { Uniform, Fixed, Unreachable };
  Kind kind = Kind::Uniform;
  double value = 0.0;

  // Uniform: what a uniform-emission model scores on `length` symbols out of `symbols`.
  double threshold(std::size_t symbols, std::size_t length) const;
};

// One element of the stream a layer works on: an observation or a substituted label.
struct StreamItem {
  std::string token;
  std::vector<std::size_t> sources;  // indices into the original event list
  double confidence = 1.0;
  bool recognized = false;

  friend bool operator==(const StreamItem&, const StreamItem&) = default;
};
using Stream = std::vector<StreamItem>;

Stream make_stream(std::span<const ObservationEvent> events);
std::vector<std::string> tokens_of(const Stream& stream);

struct LayerConfig {
  Catalog catalog;
  ModelBank bank;
  WindowingPolicy windowing;
  FilterConfig filters;
  Architecture architecture = Architecture::Cascaded;
  Decoder decoder = Decoder::PerClass;
  AcceptanceFloor floor;
  double min_confidence = 0.0;
  std::size_t max_passes = 16;
};

// Layer with sliding windows as wide as the catalog's patterns.
LayerConfig make_layer(Catalog catalog, ModelBank bank);

struct LayerStack {
  std::vector<LayerConfig> layers;

  // Throws ConfigError when a layer is inconsistent or a layer's vocabulary
  // lacks a label the previous layer can emit.
  void validate() const;
};

struct RecognitionResult {
  std::string label;
  double log_likelihood = 0.0;
  double confidence = 0.0;
  std::size_t span_start = 0;  // positions in the stream processed at this layer
  std::size_t span_end = 0;
  std::vector<std::size_t> sources;  // original event indices covered
  int layer = 1;
  Architecture architecture = Architecture::Cascaded;
  std::string context;
  std::vector<std::string> provenance;

  friend bool operator==(const RecognitionResult&, const RecognitionResult&) = default;
};

// Human-readable record of what a run did; collected only when passed in.
class Trace {
 public:
  void note(std::string line) { lines_.push_back(indent_ + std::move(line)); }
  void push() { indent_ += "  "; }
  void pop() { indent_.resize(indent_.size() >= 2 ? indent_.size() - 2 : 0); }
  const std::vector<std::string>& lines() const noexcept { return lines_; }
  std::string str() const;

 private:
  std::vector<std::string> lines_;
  std::string indent_;
};

struct RunContext {
  int layer = 1;
  std::string context;
  std::optional<std::string> tag;  // restricts labels in by-tag hybrid runs
  Trace* trace = nullptr;
};

struct WindowDecision {
  std::string label;
  double log_likelihood = 0.0;
  double confidence = 0.0;
  bool accepted = false;
  std::vector<LabelScore> scores;
};

WindowDecision decode_window(const LayerConfig& layer, std::span<const Code> codes,
                             const std::optional<std::string>& tag = std::nullopt);

/// Concatenated N-HMM: every window scored on its own, accepted results in span order.
std::vector<RecognitionResult> run_nhmm(const Stream& stream, const LayerConfig& layer, const RunContext& ctx = {});
std::vector<RecognitionResult> run_nhmm(std::span<const Code> codes, const LayerConfig& layer);

struct CascadeOutput {
  Stream stream;
  std::vector<RecognitionResult> results;
};

/// Cascaded C-HMM: scanning left to right, an accepted window is replaced by
/// its label and the scan resumes at that point; passes repeat until nothing
/// is substituted or `layer.max_passes` is reached.
CascadeOutput run_chmm(Stream stream, const LayerConfig& layer, const RunContext& ctx = {});
std::pair<std::vector<Code>, std::vector<RecognitionResult>> run_chmm(std::span<const Code> codes,
                                                                      const LayerConfig& layer,
                                                                      std::size_t max_passes);

struct LayerOutput {
  Stream input;   // after this layer's filters
  Stream output;  // after substitution; equals input for N layers
  std::vector<RecognitionResult> results;
  std::vector<FrequencyFinding> frequency;
};

// Filters, frequency findings, then the layer's architecture.
LayerOutput run_layer(const Stream& stream, const LayerConfig& layer, const RunContext& ctx = {});

// Layer k consumes layer k-1's output stream.
std::vector<LayerOutput> run_layer_stack(const Stream& stream, const LayerStack& stack, const RunContext& ctx = {});
std::vector<LayerOutput> run_layer_stack(std::span<const ObservationEvent> events, const LayerStack& stack,
                                         const RunContext& ctx = {});

struct ContextPartition {
  std::map<std::string, std::vector<std::size_t>> contexts;  // key -> increasing event indices
};

/// PerEntity: each event goes to every entity it names; events naming no
/// entity go to every entity whose first..last appearance spans them.
/// ByTag: an event goes to tag T when its token occurs in a rule tagged T
/// (or in an untagged rule). `tags` limits which tags become contexts.
ContextPartition partition_contexts(std::span<const ObservationEvent> events, ContextMode mode,
                                    const Catalog* catalog = nullptr, const std::vector<std::string>& tags = {});

struct HybridOutput {
  ContextPartition partition;
  std::map<std::string, std::vector<LayerOutput>> contexts;

  std::map<std::string, std::vector<RecognitionResult>> results() const;
};

HybridOutput run_hhmm(std::span<const ObservationEvent> events, const LayerStack& stack, ContextMode mode,
                      const std::vector<std::string>& tags = {}, Trace* trace = nullptr);

// Highest log-likelihood; ties by earliest span start, then label.
RecognitionResult ml_fuse(std::span<const RecognitionResult> results);

}  // namespace gahmm
