#include "gahmm/model_store.hpp"

#include <cstdio>

#include "gahmm/errors.hpp"
#include "gahmm/text_util.hpp"

namespace gahmm {

namespace {

void append_row(std::string& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ' ';
    out += text::format_double(row[i]);
  }
  out += '\n';
}

void append_model(std::string& out, const HmmModel& m) {
  out += "states " + std::to_string(m.states()) + " symbols " + std::to_string(m.symbols()) + "\n";
  for (std::size_t i = 0; i < m.states(); ++i) {
    out += "state " + (i < m.state_labels.size() ? m.state_labels[i] : std::to_string(i)) + "\n";
  }
  out += "initial ";
  append_row(out, m.initial);
  out += "transition\n";
  for (std::size_t i = 0; i < m.states(); ++i) append_row(out, m.transition.row(i));
  out += "emission\n";
  for (std::size_t i = 0; i < m.states(); ++i) append_row(out, m.emission.row(i));
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(text::lines(text)) {}

  std::string_view next() {
    if (pos_ >= lines_.size()) throw ParseError(pos_ + 1, "unexpected end of bank file");
    return lines_[pos_++];
  }
  std::size_t line_no() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ >= lines_.size(); }

  // Reads `keyword rest` and returns rest.
  std::string_view expect(std::string_view keyword) {
    const auto l = next();
    if (l == keyword) return {};
    if (l.size() > keyword.size() && l.substr(0, keyword.size()) == keyword && l[keyword.size()] == ' ') {
      return l.substr(keyword.size() + 1);
    }
    throw ParseError(pos_, "expected '" + std::string(keyword) + "'");
  }

  std::size_t expect_count(std::string_view keyword) {
    const auto v = text::parse_int(expect(keyword));
    if (!v || *v < 0) throw ParseError(pos_, "bad count after '" + std::string(keyword) + "'");
    return static_cast<std::size_t>(*v);
  }

  double expect_real(std::string_view keyword) {
    const auto v = text::parse_double(expect(keyword));
    if (!v) throw ParseError(pos_, "bad number after '" + std::string(keyword) + "'");
    return *v;
  }

  std::vector<double> reals(std::string_view s, std::size_t count) {
    const auto words = text::split_ws(s);
    if (words.size() != count) {
      throw ParseError(pos_, "expected " + std::to_string(count) + " values, got " + std::to_string(words.size()));
    }
    std::vector<double> out;
    out.reserve(count);
    for (auto w : words) {
      const auto v = text::parse_double(w);
      if (!v) throw ParseError(pos_, "bad number '" + std::string(w) + "'");
      out.push_back(*v);
    }
    return out;
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

HmmModel read_model(LineReader& in) {
  const auto header = text::split_ws(in.next());
  if (header.size() != 4 || header[0] != "states" || header[2] != "symbols") {
    throw ParseError(in.line_no(), "expected 'states N symbols M'");
  }
  const auto n = text::parse_int(header[1]);
  const auto m = text::parse_int(header[3]);
  if (!n || !m || *n < 1 || *m < 1) throw ParseError(in.line_no(), "bad model dimensions");
  const auto states = static_cast<std::size_t>(*n);
  const auto symbols = static_cast<std::size_t>(*m);

  HmmModel model;
  for (std::size_t i = 0; i < states; ++i) model.state_labels.emplace_back(in.expect("state"));
  model.initial = in.reals(in.expect("initial"), states);
  in.expect("transition");
  model.transition = Matrix(states, states);
  for (std::size_t i = 0; i < states; ++i) {
    const auto row = in.reals(in.next(), states);
    std::copy(row.begin(), row.end(), model.transition.row(i).begin());
  }
  in.expect("emission");
  model.emission = Matrix(states, symbols);
  for (std::size_t i = 0; i < states; ++i) {
    const auto row = in.reals(in.next(), symbols);
    std::copy(row.begin(), row.end(), model.emission.row(i).begin());
  }
  try {
    model.validate();
  } catch (const ValidationError& e) {
    throw ParseError(in.line_no(), e.what());
  }
  return model;
}

}  // namespace

std::string format_hash(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string serialize_model(const HmmModel& model) {
  std::string out;
  append_model(out, model);
  return out;
}

HmmModel parse_model(std::string_view text) {
  LineReader in(text);
  return read_model(in);
}

std::string serialize_bank(const BankFile& bank) {
  std::string out = "gahmm-bank " + std::to_string(kBankFormatVersion) + "\n";
  out += "layers " + std::to_string(bank.layers.size()) + "\n";
  for (std::size_t k = 0; k < bank.layers.size(); ++k) {
    const auto& layer = bank.layers[k];
    out += "layer " + std::to_string(k + 1) + "\n";
    out += "vocab_hash " + format_hash(layer.catalog.vocab().hash()) + "\n";
    out += "smoothing " + text::format_double(layer.bank.smoothing) + "\n";
    out += "self_loop " + text::format_double(layer.bank.self_loop) + "\n";
    const auto rendered = render_catalog(layer.catalog);
    const auto lines = text::lines(rendered);
    out += "catalog " + std::to_string(lines.size()) + "\n";
    out += rendered;
    out += "classes " + std::to_string(layer.bank.per_class.size()) + "\n";
    for (const auto& [label, model] : layer.bank.per_class) {
      out += "class " + label + "\n";
      append_model(out, model);
    }
    out += "label_state\n";
    append_model(out, layer.bank.label_state);
    out += "end_layer\n";
  }
  return out;
}

BankFile parse_bank(std::string_view text) {
  LineReader in(text);
  const auto version = in.expect("gahmm-bank");
  if (version != std::to_string(kBankFormatVersion)) {
    throw ParseError(1, "unsupported bank format version '" + std::string(version) + "'");
  }
  BankFile bank;
  const auto n_layers = in.expect_count("layers");
  for (std::size_t k = 0; k < n_layers; ++k) {
    if (in.expect_count("layer") != k + 1) throw ParseError(in.line_no(), "layers out of order");
    const std::string hash(in.expect("vocab_hash"));
    TrainedLayer layer;
    layer.bank.smoothing = in.expect_real("smoothing");
    layer.bank.self_loop = in.expect_real("self_loop");
    const auto n_lines = in.expect_count("catalog");
    const auto catalog_start = in.line_no();
    std::string catalog_text;
    for (std::size_t i = 0; i < n_lines; ++i) {
      catalog_text += in.next();
      catalog_text += '\n';
    }
    try {
      layer.catalog = parse_catalog(catalog_text);
    } catch (const ParseError& e) {
      throw ParseError(catalog_start + e.line(), std::string("embedded catalog: ") + e.what());
    }
    if (format_hash(layer.catalog.vocab().hash()) != hash) {
      throw ParseError(in.line_no(), "vocabulary hash mismatch in layer " + std::to_string(k + 1));
    }
    const auto n_classes = in.expect_count("classes");
    for (std::size_t c = 0; c < n_classes; ++c) {
      std::string label(in.expect("class"));
      auto model = read_model(in);
      if (model.symbols() != layer.catalog.vocab().size()) {
        throw ParseError(in.line_no(), "model for '" + label + "' does not match the vocabulary size");
      }
      layer.bank.per_class.emplace(std::move(label), std::move(model));
    }
    if (layer.bank.per_class.size() != layer.catalog.labels().size()) {
      throw ParseError(in.line_no(), "class models do not match the catalog labels");
    }
    for (const auto& label : layer.catalog.labels()) {
      if (!layer.bank.per_class.count(label)) throw ParseError(in.line_no(), "no model for label '" + label + "'");
    }
    in.expect("label_state");
    layer.bank.label_state = read_model(in);
    if (layer.bank.label_state.state_labels != layer.catalog.labels()) {
      throw ParseError(in.line_no(), "label-state model states do not match the catalog labels");
    }
    in.expect("end_layer");
    bank.layers.push_back(std::move(layer));
  }
  return bank;
}

}  // namespace gahmm
