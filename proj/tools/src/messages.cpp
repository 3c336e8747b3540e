#include "gahmm/cli/messages.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

namespace gahmm::cli {

namespace {

void fill_sources(SemanticMessage& m, std::span<const ObservationEvent> events) {
  std::set<std::string> who;
  std::set<std::string> what;
  for (auto i : m.events) {
    const auto& e = events[i];
    who.insert(e.entity_ids.begin(), e.entity_ids.end());
    what.insert(e.object_ids.begin(), e.object_ids.end());
  }
  m.participants.assign(who.begin(), who.end());
  m.objects.assign(what.begin(), what.end());
  if (!m.events.empty()) {
    m.start = events[m.events.front()].timestamp;
    m.end = events[m.events.back()].timestamp;
  }
}

}  // namespace

SemanticMessage to_message(const RecognitionResult& r, std::span<const ObservationEvent> events) {
  SemanticMessage m;
  m.activity = r.label;
  m.events = r.sources;
  m.log_likelihood = r.log_likelihood;
  m.confidence = r.confidence;
  m.layer = r.layer;
  m.architecture = to_char(r.architecture);
  m.context = r.context;
  m.provenance = r.provenance;
  fill_sources(m, events);
  return m;
}

SemanticMessage to_message(const FrequencyFinding& f, const Stream& stream, std::span<const ObservationEvent> events,
                           int layer, char architecture, const std::string& context) {
  SemanticMessage m;
  m.kind = "frequency";
  m.activity = f.label;
  std::set<std::size_t> all;
  for (const auto& item : stream) all.insert(item.sources.begin(), item.sources.end());
  m.events.assign(all.begin(), all.end());
  m.log_likelihood = 0.0;
  m.confidence = 1.0;
  m.layer = layer;
  m.architecture = architecture;
  m.context = context;
  m.provenance = {"frequency-margin=" + std::to_string(f.margin)};
  fill_sources(m, events);
  return m;
}

void sort_messages(std::vector<SemanticMessage>& messages) {
  std::stable_sort(messages.begin(), messages.end(), [](const SemanticMessage& a, const SemanticMessage& b) {
    return std::tie(a.start, a.end, a.layer, a.context, a.activity, a.kind) <
           std::tie(b.start, b.end, b.layer, b.context, b.activity, b.kind);
  });
}

std::string to_json_line(const SemanticMessage& m) {
  nlohmann::ordered_json j;
  j["kind"] = m.kind;
  j["activity"] = m.activity;
  j["participants"] = m.participants;
  j["objects"] = m.objects;
  j["span"] = {{"start", m.start}, {"end", m.end}};
  j["events"] = m.events;
  j["log_likelihood"] = m.log_likelihood;
  j["confidence"] = m.confidence;
  j["layer"] = m.layer;
  j["architecture"] = std::string(1, m.architecture);
  j["context"] = m.context;
  j["provenance"] = m.provenance;
  return j.dump();
}

std::string table_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %-28s %-6s %-6s %-5s %-4s %-8s %12s %10s  %s", "kind", "activity", "start",
                "end", "layer", "arch", "context", "loglik", "conf", "participants");
  return buf;
}

std::string to_table_row(const SemanticMessage& m) {
  std::string who;
  for (const auto& p : m.participants) who += (who.empty() ? "" : ",") + p;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-10s %-28s %-6lld %-6lld %-5d %-4c %-8s %12.6f %10.6f  %s", m.kind.c_str(),
                m.activity.c_str(), static_cast<long long>(m.start), static_cast<long long>(m.end), m.layer,
                m.architecture, m.context.empty() ? "-" : m.context.c_str(), m.log_likelihood, m.confidence,
                who.empty() ? "-" : who.c_str());
  return buf;
}

}  // namespace gahmm::cli
