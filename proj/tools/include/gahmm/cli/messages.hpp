#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gahmm/event_model.hpp"
#include "gahmm/pipelines.hpp"

namespace gahmm::cli {

// One recognized activity, or a frequency finding, as written to standard output.
struct SemanticMessage {
  std::string kind = "activity";  // activity | frequency | fused
  std::string activity;
  std::vector<std::string> participants;
  std::vector<std::string> objects;
  std::int64_t start = 0;  // timestamps of the first and last contributing events
  std::int64_t end = 0;
  std::vector<std::size_t> events;
  double log_likelihood = 0.0;
  double confidence = 1.0;  // exp(score - best achievable score for the label)
  int layer = 1;
  char architecture = 'C';
  std::string context;
  std::vector<std::string> provenance;
};

SemanticMessage to_message(const RecognitionResult& r, std::span<const ObservationEvent> events);

SemanticMessage to_message(const FrequencyFinding& f, const Stream& stream, std::span<const ObservationEvent> events,
                           int layer, char architecture, const std::string& context);

// Span order: start, end, layer, context, activity, kind.
void sort_messages(std::vector<SemanticMessage>& messages);

std::string to_json_line(const SemanticMessage& m);

std::string table_header();
std::string to_table_row(const SemanticMessage& m);

}  // namespace gahmm::cli
