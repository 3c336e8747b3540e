#include "gahmm/ontology_catalog.hpp"

#include <algorithm>
#include <cmath>

#include "gahmm/errors.hpp"
#include "gahmm/text_util.hpp"

namespace gahmm {

std::string_view to_string(MatchMode m) { return m == MatchMode::Exact ? "exact" : "stripped"; }

namespace {

std::string describe(const OntologyEntry& e) {
  std::string s;
  for (std::size_t i = 0; i < e.pattern.size(); ++i) {
    if (i) s += " - ";
    s += e.pattern[i];
  }
  return s + " -> " + e.label;
}

}  // namespace

Catalog::Catalog(CatalogOptions options, std::vector<OntologyEntry> entries)
    : options_(std::move(options)), entries_(std::move(entries)) {
  if (options_.window == 0 && !entries_.empty()) options_.window = entries_.front().pattern.size();

  for (const auto& [from, to] : options_.aliases) {
    const auto key = canonical_unaliased(from);
    const auto target = canonical_unaliased(to);
    if (key.empty() || target.empty()) throw ValidationError("empty alias");
    if (auto [it, inserted] = alias_map_.emplace(key, target); !inserted && it->second != target) {
      throw ValidationError("conflicting aliases for '" + from + "'");
    }
  }

  for (const auto& s : options_.extra_symbols) vocab_.add(canonical(s));

  std::map<std::vector<std::string>, std::size_t> seen_patterns;
  std::map<std::string, std::string> label_symbols;  // canonical -> display
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.pattern.empty()) throw CatalogError(i, "rule '" + describe(e) + "' has an empty pattern");
    if (e.pattern.size() != options_.window) {
      throw CatalogError(i, "rule '" + describe(e) + "' has " + std::to_string(e.pattern.size()) +
                                " symbols; every rule must have " + std::to_string(options_.window));
    }
    if (text::trim(e.label).empty()) throw CatalogError(i, "rule '" + describe(e) + "' has an empty label");
    if (e.layer < 0) throw CatalogError(i, "rule '" + describe(e) + "' has a negative layer");

    std::vector<std::string> key;
    for (const auto& sym : e.pattern) key.push_back(canonical(sym));
    if (auto [it, inserted] = seen_patterns.emplace(key, i); !inserted) {
      throw CatalogError(i, "rule '" + describe(e) + "' duplicates the pattern of rule '" +
                                describe(entries_[it->second]) + "'");
    }
    const auto label_sym = canonical(e.label);
    if (auto [it, inserted] = label_symbols.emplace(label_sym, e.label); !inserted && it->second != e.label) {
      throw CatalogError(i, "labels '" + it->second + "' and '" + e.label + "' collide as symbol '" +
                                label_sym + "'");
    }
    for (const auto& sym : key) vocab_.add(sym);
    vocab_.add(label_sym);
  }
  for (const auto& [key, target] : alias_map_) vocab_.add(target);
  vocab_.finalize();
}

std::string Catalog::canonical_unaliased(std::string_view token) const {
  auto tok = to_token(token);
  if (options_.match == MatchMode::Exact) return tok;
  return text::to_lower(strip_ids(tok, options_.grammar).action);
}

std::string Catalog::canonical(std::string_view token) const {
  auto tok = canonical_unaliased(token);
  if (auto it = alias_map_.find(tok); it != alias_map_.end()) return it->second;
  return tok;
}

std::vector<Code> Catalog::encode_pattern(const OntologyEntry& entry) const {
  std::vector<Code> out;
  out.reserve(entry.pattern.size());
  for (const auto& s : entry.pattern) out.push_back(encode(s));
  return out;
}

std::vector<std::string> Catalog::labels() const {
  std::set<std::string> s;
  for (const auto& e : entries_) s.insert(e.label);
  return {s.begin(), s.end()};
}

std::vector<std::string> Catalog::tags() const {
  std::set<std::string> s;
  for (const auto& e : entries_) s.insert(e.context_tags.begin(), e.context_tags.end());
  return {s.begin(), s.end()};
}

bool Catalog::label_in_context(std::string_view label, std::string_view tag) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const OntologyEntry& e) {
    return e.label == label && (e.context_tags.empty() || e.context_tags.count(std::string(tag)) > 0);
  });
}

namespace {


OntologyEntry parse_rule(std::string_view line, std::size_t line_no) {
  const auto arrow = line.find("->");
  if (arrow == std::string_view::npos) throw ParseError(line_no, "expected 'pattern -> Label'");
  if (line.find("->", arrow + 2) != std::string_view::npos) throw ParseError(line_no, "more than one '->'");

  OntologyEntry e;
  const auto lhs = text::split_ws(line.substr(0, arrow));
  if (lhs.empty()) throw ParseError(line_no, "empty pattern");
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const bool want_sep = (i % 2) == 1;
    if (want_sep && lhs[i] != "-") {
      throw ParseError(line_no, "expected ' - ' between pattern symbols, found '" + std::string(lhs[i]) + "'");
    }
    if (!want_sep) {
      if (lhs[i] == "-") throw ParseError(line_no, "dangling '-' in pattern");
      e.pattern.emplace_back(lhs[i]);
    }
  }
  if (lhs.size() % 2 == 0) throw ParseError(line_no, "pattern ends with '-'");

  const auto rhs = text::split_ws(line.substr(arrow + 2));
  std::size_t i = 0;
  for (; i < rhs.size() && rhs[i].front() != '@'; ++i) {
    if (!e.label.empty()) e.label += ' ';
    e.label += rhs[i];
  }
  if (e.label.empty()) throw ParseError(line_no, "missing label after '->'");
  for (; i < rhs.size(); ++i) {
    const auto tag = rhs[i];
    if (tag.front() != '@' || tag.size() < 2) {
      throw ParseError(line_no, "label words must precede tags, found '" + std::string(tag) + "'");
    }
    if (tag.substr(0, 7) == "@layer=") {
      const auto v = text::parse_int(tag.substr(7));
      if (!v || *v < 0) throw ParseError(line_no, "bad layer in '" + std::string(tag) + "'");
      e.layer = static_cast<int>(*v);
    } else {
      e.context_tags.emplace(tag.substr(1));
    }
  }
  return e;
}

void parse_directive(std::string_view line, std::size_t line_no, CatalogOptions& opt, std::string& entity_re,
                     std::string& object_re) {
  const auto words = text::split_ws(line);
  const auto name = words.front();
  auto need = [&](std::size_t n) {
    if (words.size() != n + 1) {
      throw ParseError(line_no, std::string(name) + " expects " + std::to_string(n) + " argument(s)");
    }
  };
  if (name == "@window") {
    need(1);
    const auto w = text::parse_int(words[1]);
    if (!w || *w < 1) throw ParseError(line_no, "window must be a positive integer");
    opt.window = static_cast<std::size_t>(*w);
  } else if (name == "@match") {
    need(1);
    if (words[1] == "exact") opt.match = MatchMode::Exact;
    else if (words[1] == "stripped") opt.match = MatchMode::Stripped;
    else throw ParseError(line_no, "match mode must be 'exact' or 'stripped'");
  } else if (name == "@entity_ids") {
    need(1);
    entity_re = std::string(words[1]);
  } else if (name == "@object_ids") {
    need(1);
    object_re = std::string(words[1]);
  } else if (name == "@vocab") {
    if (words.size() < 2) throw ParseError(line_no, "@vocab expects at least one symbol");
    for (std::size_t i = 1; i < words.size(); ++i) opt.extra_symbols.emplace_back(words[i]);
  } else if (name == "@alias") {
    need(2);
    opt.aliases.emplace_back(std::string(words[1]), std::string(words[2]));
  } else {
    throw ParseError(line_no, "unknown directive '" + std::string(name) + "'");
  }
}

}  // namespace

Catalog parse_catalog(std::string_view text) {
  CatalogOptions opt;
  std::string entity_re(PrefixGrammar::kDefaultEntityPattern);
  std::string object_re(PrefixGrammar::kDefaultObjectPattern);
  std::vector<OntologyEntry> entries;
  std::vector<std::size_t> entry_lines;

  std::size_t line_no = 0;
  for (auto raw : text::lines(text)) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '@') {
      parse_directive(line, line_no, opt, entity_re, object_re);
    } else {
      entries.push_back(parse_rule(line, line_no));
      entry_lines.push_back(line_no);
    }
  }
  try {
    opt.grammar = PrefixGrammar(entity_re, object_re);
    return Catalog(std::move(opt), std::move(entries));
  } catch (const CatalogError& e) {
    throw ParseError(entry_lines.at(e.entry()), e.what());
  }
}

std::string render_catalog(const Catalog& catalog) {
  const auto& opt = catalog.options();
  std::string out;
  if (opt.window > 0) out += "@window " + std::to_string(opt.window) + "\n";
  out += "@match " + std::string(to_string(opt.match)) + "\n";
  if (!opt.grammar.is_default()) {
    out += "@entity_ids " + opt.grammar.entity_pattern() + "\n";
    out += "@object_ids " + opt.grammar.object_pattern() + "\n";
  }
  constexpr std::size_t kPerLine = 6;
  for (std::size_t i = 0; i < opt.extra_symbols.size(); i += kPerLine) {
    out += "@vocab";
    for (std::size_t j = i; j < std::min(i + kPerLine, opt.extra_symbols.size()); ++j) {
      out += ' ';
      out += opt.extra_symbols[j];
    }
    out += '\n';
  }
  for (const auto& [from, to] : opt.aliases) out += "@alias " + from + " " + to + "\n";
  for (const auto& e : catalog.entries()) {
    for (std::size_t i = 0; i < e.pattern.size(); ++i) {
      if (i) out += " - ";
      out += e.pattern[i];
    }
    out += " -> " + e.label;
    for (const auto& t : e.context_tags) out += " @" + t;
    if (e.layer != 0) out += " @layer=" + std::to_string(e.layer);
    out += '\n';
  }
  return out;
}

double correlation_wt(double base, int occurrences) {
  if (!(base > 0.0 && base <= 1.0)) throw DomainError("correlation base weight must lie in (0,1]");
  if (occurrences < 1) throw DomainError("correlation occurrence count must be >= 1");
  return 1.0 - std::ldexp(1.0 - base, -(occurrences - 1));
}

PairWeightTable::PairWeightTable(double base_weight, std::map<Pair, int> counts)
    : base_(base_weight), counts_(std::move(counts)) {
  for (const auto& [pair, y] : counts_) cumulative_.emplace(pair, correlation_wt(base_, y));
}

int PairWeightTable::count(Code a, Code b) const {
  const auto it = counts_.find({a, b});
  return it == counts_.end() ? 0 : it->second;
}

double PairWeightTable::weight(Code a, Code b) const {
  const auto it = cumulative_.find({a, b});
  return it == cumulative_.end() ? 0.0 : it->second;
}

PairWeightTable build_pair_weights(const Catalog& catalog) {
  if (catalog.empty()) throw DomainError("pair weights need a nonempty catalog");
  const auto len = catalog.window();
  if (len < 2) throw DomainError("pair weights need patterns of length >= 2");
  std::map<PairWeightTable::Pair, int> counts;
  for (const auto& e : catalog.entries()) {
    const auto codes = catalog.encode_pattern(e);
    for (std::size_t i = 0; i + 1 < codes.size(); ++i) ++counts[{codes[i], codes[i + 1]}];
  }
  return PairWeightTable(1.0 / static_cast<double>(len - 1), std::move(counts));
}

}  // namespace gahmm
