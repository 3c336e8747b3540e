#include "gahmm/event_model.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "gahmm/errors.hpp"
#include "gahmm/text_util.hpp"

namespace gahmm {

namespace {

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

void push_unique(std::vector<std::string>& v, std::string_view s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.emplace_back(s);
}

}  // namespace

Vocabulary::Vocabulary() {
  names_.emplace_back(kOovName);
  index_.emplace(std::string(kOovName), kOov);
}

Code Vocabulary::add(std::string_view name) {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  if (finalized_) throw std::logic_error("vocabulary is finalized; cannot add '" + std::string(name) + "'");
  if (name.empty() || has_space(name)) {
    throw ValidationError("invalid observation name '" + std::string(name) + "'");
  }
  const auto code = static_cast<Code>(names_.size());
  names_.emplace_back(name);
  index_.emplace(std::string(name), code);
  return code;
}

std::optional<Code> Vocabulary::find(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  return std::nullopt;
}

Code Vocabulary::lookup(std::string_view name) const { return find(name).value_or(kOov); }

const std::string& Vocabulary::name(Code index) const {
  if (index >= names_.size()) throw std::out_of_range("symbol index " + std::to_string(index) + " out of range");
  return names_[index];
}

std::uint64_t Vocabulary::hash() const noexcept {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& n : names_) {
    for (char c : n) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

std::vector<Code> encode(std::span<const ObservationEvent> events, const Vocabulary& vocab) {
  if (!vocab.finalized()) throw std::logic_error("encode requires a finalized vocabulary");
  std::vector<Code> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(vocab.lookup(e.token));
  return out;
}

PrefixGrammar::PrefixGrammar()
    : PrefixGrammar(std::string(kDefaultEntityPattern), std::string(kDefaultObjectPattern)) {}

PrefixGrammar::PrefixGrammar(std::string entity_pattern, std::string object_pattern)
    : entity_src_(std::move(entity_pattern)), object_src_(std::move(object_pattern)) {
  try {
    entity_ = std::regex(entity_src_);
    object_ = std::regex(object_src_);
  } catch (const std::regex_error& e) {
    throw ValidationError("invalid ID pattern: " + std::string(e.what()));
  }
}

bool PrefixGrammar::is_entity(std::string_view segment) const {
  return !segment.empty() && std::regex_match(segment.begin(), segment.end(), entity_);
}

bool PrefixGrammar::is_object(std::string_view segment) const {
  return !segment.empty() && std::regex_match(segment.begin(), segment.end(), object_);
}

bool PrefixGrammar::is_default() const noexcept {
  return entity_src_ == kDefaultEntityPattern && object_src_ == kDefaultObjectPattern;
}

StrippedToken strip_ids(std::string_view token, const PrefixGrammar& grammar) {
  const auto segs = text::split(token, '_');
  auto is_id = [&](std::string_view s) { return grammar.is_entity(s) || grammar.is_object(s); };

  std::size_t lead = 0;
  while (lead < segs.size() && is_id(segs[lead])) ++lead;
  std::size_t trail = segs.size();
  while (trail > lead && is_id(segs[trail - 1])) --trail;

  StrippedToken out;
  if (lead == trail || (lead == 0 && trail == segs.size())) {
    out.action = std::string(token);
    return out;
  }
  auto take = [&](std::string_view s) {
    if (grammar.is_entity(s)) push_unique(out.entity_ids, s);
    else push_unique(out.object_ids, s);
  };
  for (std::size_t i = 0; i < lead; ++i) take(segs[i]);
  for (std::size_t i = trail; i < segs.size(); ++i) take(segs[i]);
  for (std::size_t i = lead; i < trail; ++i) {
    if (i > lead) out.action += '_';
    out.action += segs[i];
  }
  return out;
}

StrippedToken strip_ids(const ObservationEvent& event, const PrefixGrammar& grammar) {
  return strip_ids(event.token, grammar);
}

void annotate_ids(std::vector<ObservationEvent>& events, const PrefixGrammar& grammar) {
  for (auto& e : events) {
    auto s = strip_ids(e.token, grammar);
    e.entity_ids = std::move(s.entity_ids);
    e.object_ids = std::move(s.object_ids);
  }
}

namespace {

std::size_t line_of(std::string_view text, std::size_t offset) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

std::vector<ObservationEvent> parse_compact(std::string_view text, std::string_view body, std::size_t body_offset,
                                            const PrefixGrammar& grammar) {
  std::vector<ObservationEvent> events;
  if (text::trim(body).empty()) return events;
  std::size_t offset = body_offset;
  for (auto raw : text::split(body, ',')) {
    const auto tok = text::trim(raw);
    const auto line = line_of(text, offset);
    offset += raw.size() + 1;
    if (tok.empty()) throw ParseError(line, "empty token in bracketed array");
    if (has_space(tok)) throw ParseError(line, "token '" + std::string(tok) + "' contains whitespace");
    ObservationEvent e;
    e.token = std::string(tok);
    e.timestamp = static_cast<std::int64_t>(events.size() + 1);
    events.push_back(std::move(e));
  }
  annotate_ids(events, grammar);
  return events;
}

double parse_confidence(std::string_view field, std::size_t line) {
  const auto v = text::parse_double(field);
  if (!v) throw ParseError(line, "bad confidence '" + std::string(field) + "'");
  if (!(*v >= 0.0 && *v <= 1.0)) {
    throw ValidationError("line " + std::to_string(line) + ": confidence " + text::format_double(*v) +
                          " outside [0,1]");
  }
  return *v;
}

}  // namespace

std::vector<ObservationEvent> parse_event_stream(std::string_view text, const PrefixGrammar& grammar) {
  // Leading comment lines may precede a bracketed array.
  std::size_t first = 0;
  while (first < text.size()) {
    const auto eol = std::min(text.find('\n', first), text.size());
    const auto l = text::trim(text.substr(first, eol - first));
    if (!l.empty() && l.front() != '#') break;
    first = eol + 1;
  }
  const auto trimmed = first < text.size() ? text::trim(text.substr(first)) : std::string_view{};
  if (!trimmed.empty() && trimmed.front() == '[') {
    if (trimmed.back() != ']') throw ParseError(line_of(text, text.size()), "unterminated bracketed array");
    const auto body_offset = static_cast<std::size_t>(trimmed.data() - text.data()) + 1;
    return parse_compact(text, trimmed.substr(1, trimmed.size() - 2), body_offset, grammar);
  }

  std::vector<ObservationEvent> events;
  std::size_t line_no = 0;
  for (auto line : text::lines(text)) {
    ++line_no;
    const auto content = text::trim(line);
    if (content.empty() || content.front() == '#') continue;

    const auto fields = text::split(content, '\t');
    ObservationEvent e;
    e.timestamp = static_cast<std::int64_t>(line_no);
    std::string_view token;
    switch (fields.size()) {
      case 1:
        token = fields[0];
        break;
      case 2:
        if (auto ts = text::parse_int(fields[0])) {
          e.timestamp = *ts;
          token = fields[1];
        } else {
          token = fields[0];
          e.confidence = parse_confidence(fields[1], line_no);
        }
        break;
      case 3:
        if (!text::trim(fields[0]).empty()) {
          auto ts = text::parse_int(fields[0]);
          if (!ts) throw ParseError(line_no, "bad timestamp '" + std::string(fields[0]) + "'");
          e.timestamp = *ts;
        }
        token = fields[1];
        if (!text::trim(fields[2]).empty()) e.confidence = parse_confidence(fields[2], line_no);
        break;
      default:
        throw ParseError(line_no, "expected at most 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    token = text::trim(token);
    if (token.empty()) throw ParseError(line_no, "missing observation token");
    if (has_space(token)) throw ParseError(line_no, "token '" + std::string(token) + "' contains whitespace");
    if (!events.empty() && e.timestamp < events.back().timestamp) {
      throw ValidationError("line " + std::to_string(line_no) + ": timestamp " + std::to_string(e.timestamp) +
                            " decreases");
    }
    e.token = std::string(token);
    events.push_back(std::move(e));
  }
  annotate_ids(events, grammar);
  return events;
}

std::string serialize_event_stream(std::span<const ObservationEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += std::to_string(e.timestamp);
    out += '\t';
    out += e.token;
    out += '\t';
    out += text::format_double(e.confidence);
    out += '\n';
  }
  return out;
}

std::string to_token(std::string_view text) {
  std::string out;
  for (auto part : text::split_ws(text)) {
    if (!out.empty()) out += '_';
    out += part;
  }
  return out;
}

}  // namespace gahmm
