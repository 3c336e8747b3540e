#include "gahmm/cli/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gahmm/errors.hpp"
#include "gahmm/text_util.hpp"

namespace gahmm::cli {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double real(std::size_t line, std::string_view key, std::string_view value) {
  const auto v = text::parse_double(value);
  if (!v || !std::isfinite(*v)) fail(line, std::string(key) + " expects a number, got '" + std::string(value) + "'");
  return *v;
}

bool boolean(std::size_t line, std::string_view key, std::string_view value) {
  const auto v = text::to_lower(value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(line, std::string(key) + " expects true or false");
}

bool layer_key(LayerSettings& s, std::size_t line, std::string_view key, std::string_view value,
               const std::filesystem::path& base_dir) {
  if (key == "catalog") {
    std::filesystem::path p{std::string(value)};
    s.catalog = p.is_absolute() ? p : base_dir / p;
  } else if (key == "architecture") {
    const auto a = architecture_from(value);
    if (!a || *a == Architecture::Hybrid) fail(line, "a layer architecture is N or C");
    s.architecture = a;
  } else if (key == "window") {
    const auto v = text::to_lower(value);
    if (v == "fixed") s.window = WindowCase::Fixed;
    else if (v == "flooring") s.window = WindowCase::Flooring;
    else if (v == "sliding") s.window = WindowCase::Sliding;
    else fail(line, "window is fixed, flooring or sliding");
  } else if (key == "decoder") {
    if (value == "per_class") s.decoder = Decoder::PerClass;
    else if (value == "label_state") s.decoder = Decoder::LabelState;
    else fail(line, "decoder is per_class or label_state");
  } else if (key == "acceptance_floor") {
    if (value == "uniform") s.floor = {AcceptanceFloor::Kind::Uniform, 0.0};
    else if (value == "inf") s.floor = {AcceptanceFloor::Kind::Unreachable, 0.0};
    else s.floor = {AcceptanceFloor::Kind::Fixed, real(line, key, value)};
  } else if (key == "min_confidence") {
    s.min_confidence = real(line, key, value);
    if (s.min_confidence < 0.0 || s.min_confidence > 1.0) fail(line, "min_confidence must lie in [0,1]");
  } else if (key == "max_passes") {
    const auto v = text::parse_int(value);
    if (!v || *v < 1) fail(line, "max_passes must be a positive integer");
    s.max_passes = static_cast<std::size_t>(*v);
  } else if (key == "confidence_floor") {
    s.filters.confidence_floor = real(line, key, value);
  } else if (key == "trivial") {
    for (auto t : text::split_ws(value)) s.filters.trivial_symbols.insert(std::string(t));
  } else if (key == "distinct") {
    s.filters.distinct = boolean(line, key, value);
  } else if (key == "correlation") {
    s.filters.correlation = boolean(line, key, value);
  } else if (key == "correlation_threshold") {
    s.filters.correlation_threshold = real(line, key, value);
  } else if (key == "frequency") {
    const auto f = text::split_ws(value);
    if (f.size() != 5) fail(line, "frequency expects: symbol_a symbol_b label_a label_b min_margin");
    const auto margin = text::parse_int(f[4]);
    if (!margin || *margin < 1) fail(line, "frequency margin must be a positive integer");
    s.filters.frequency_rules.push_back(
        {std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), static_cast<int>(*margin)});
  } else {
    return false;
  }
  try {
    s.filters.validate();
  } catch (const ConfigError& e) {
    fail(line, e.what());
  }
  return true;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  LayerSettings* current = &cfg.defaults;
  std::size_t line_no = 0;
  for (auto raw : text::lines(text)) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line != "[layer]") fail(line_no, "unknown section " + std::string(line));
      cfg.layers.push_back(cfg.defaults);
      current = &cfg.layers.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    if (value.empty()) fail(line_no, std::string(key) + " has no value");

    const bool global = current == &cfg.defaults;
    if (global && key == "architecture") {
      const auto a = architecture_from(value);
      if (!a) fail(line_no, "architecture is N, C or H");
      cfg.architecture = *a;
    } else if (global && key == "context_mode") {
      if (value == "per_entity") cfg.context_mode = ContextMode::PerEntity;
      else if (value == "by_tag") cfg.context_mode = ContextMode::ByTag;
      else fail(line_no, "context_mode is per_entity or by_tag");
    } else if (global && key == "context_tags") {
      cfg.context_tags.clear();
      for (auto t : text::split_ws(value)) cfg.context_tags.emplace_back(t);
    } else if (global && key == "output") {
      if (value == "json") cfg.output = OutputFormat::Json;
      else if (value == "table") cfg.output = OutputFormat::Table;
      else fail(line_no, "output is json or table");
    } else if (global && key == "fuse") {
      cfg.fuse = boolean(line_no, key, value);
    } else if (global && key == "alpha") {
      cfg.alpha = real(line_no, key, value);
    } else if (!layer_key(*current, line_no, key, value, base_dir)) {
      fail(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  return cfg;
}

namespace {

std::string read_catalog(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read catalog " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LayerStack build_stack(const RunConfig& config, const BankFile& bank) {
  if (bank.layers.empty()) throw ConfigError("bank has no layers");
  if (!config.layers.empty() && config.layers.size() != bank.layers.size()) {
    throw ConfigError("config describes " + std::to_string(config.layers.size()) + " layers but the bank has " +
                      std::to_string(bank.layers.size()));
  }
  LayerStack stack;
  for (std::size_t k = 0; k < bank.layers.size(); ++k) {
    const auto& trained = bank.layers[k];
    const auto& s = config.layers.empty() ? config.defaults : config.layers[k];
    const auto where = "layer " + std::to_string(k + 1) + ": ";
    if (config.alpha && std::abs(*config.alpha - trained.bank.smoothing) > 1e-12) {
      throw ConfigError(where + "bank was trained with alpha " + text::format_double(trained.bank.smoothing));
    }
    if (s.catalog) {
      Catalog expected;
      try {
        expected = parse_catalog(read_catalog(*s.catalog));
      } catch (const InputError& e) {
        throw ConfigError(s.catalog->string() + ": " + e.what());
      }
      if (expected.vocab().hash() != trained.catalog.vocab().hash()) {
        throw ConfigError(where + "vocabulary hash mismatch: " + s.catalog->string() + " has " +
                          format_hash(expected.vocab().hash()) + ", bank has " +
                          format_hash(trained.catalog.vocab().hash()));
      }
    }
    auto layer = make_layer(trained.catalog, trained.bank);
    layer.windowing.kind = s.window;
    layer.decoder = s.decoder;
    layer.floor = s.floor;
    layer.min_confidence = s.min_confidence;
    layer.max_passes = s.max_passes;
    layer.filters = s.filters;
    if (s.architecture) {
      layer.architecture = *s.architecture;
    } else {
      layer.architecture =
          config.architecture == Architecture::Hybrid ? Architecture::Cascaded : config.architecture;
    }
    stack.layers.push_back(std::move(layer));
  }
  stack.validate();
  return stack;
}

}  // namespace gahmm::cli
