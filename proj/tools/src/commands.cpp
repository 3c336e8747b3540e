#include "gahmm/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gahmm/cli/messages.hpp"
#include "gahmm/cli/run_config.hpp"
#include "gahmm/errors.hpp"
#include "gahmm/model_store.hpp"

namespace gahmm::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

struct Session {
  std::vector<ObservationEvent> events;
  BankFile bank;
  RunConfig config;
  LayerStack stack;
};

Session load(const RunOptions& opts) {
  Session s;
  const auto bank_text = read_file(opts.bank);
  try {
    s.bank = parse_bank(bank_text);
  } catch (const InputError& e) {
    throw InputError(opts.bank.string() + ": " + e.what());
  }
  if (opts.config) {
    const auto text = read_file(*opts.config);
    s.config = parse_run_config(text, opts.config->parent_path());
  }
  s.stack = build_stack(s.config, s.bank);
  const auto events_text = read_file(opts.events);
  try {
    s.events = parse_event_stream(events_text, s.bank.layers.front().catalog.grammar());
  } catch (const InputError& e) {
    throw InputError(opts.events.string() + ": " + e.what());
  }
  return s;
}

void collect(const std::vector<LayerOutput>& layers, const std::vector<ObservationEvent>& events, char arch,
             const std::string& context, bool fuse, std::vector<SemanticMessage>& out) {
  std::vector<RecognitionResult> all;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (const auto& r : layers[k].results) out.push_back(to_message(r, events));
    for (const auto& f : layers[k].frequency) {
      out.push_back(to_message(f, layers[k].input, events, static_cast<int>(k + 1), arch, context));
    }
    all.insert(all.end(), layers[k].results.begin(), layers[k].results.end());
  }
  if (fuse && !all.empty()) {
    auto m = to_message(ml_fuse(all), events);
    m.kind = "fused";
    out.push_back(std::move(m));
  }
}

std::vector<SemanticMessage> execute(const Session& s, Trace* trace) {
  std::vector<SemanticMessage> messages;
  if (s.config.architecture == Architecture::Hybrid) {
    const auto run = run_hhmm(s.events, s.stack, s.config.context_mode, s.config.context_tags, trace);
    for (const auto& [key, layers] : run.contexts) collect(layers, s.events, 'H', key, s.config.fuse, messages);
  } else {
    RunContext ctx;
    ctx.trace = trace;
    const auto layers = run_layer_stack(s.events, s.stack, ctx);
    collect(layers, s.events, to_char(s.config.architecture), "", s.config.fuse, messages);
  }
  sort_messages(messages);
  return messages;
}

void write_messages(const std::vector<SemanticMessage>& messages, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Table) {
    out << table_header() << '\n';
    for (const auto& m : messages) out << to_table_row(m) << '\n';
    return;
  }
  for (const auto& m : messages) out << to_json_line(m) << '\n';
}

}  // namespace

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.catalogs.empty()) throw InputError("no catalog given");
    BankFile file;
    LayerStack stack;
    for (const auto& path : opts.catalogs) {
      Catalog catalog;
      try {
        catalog = parse_catalog(read_file(path));
      } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
      }
      if (catalog.empty()) throw InputError(path.string() + ": empty catalog");
      auto bank = build_model_bank(catalog, opts.alpha, opts.self_loop);
      stack.layers.push_back(make_layer(catalog, bank));
      file.layers.push_back({std::move(catalog), std::move(bank)});
    }
    stack.validate();

    const auto text = serialize_bank(file);
    std::ofstream dst(opts.out, std::ios::binary | std::ios::trunc);
    if (!dst || !(dst << text) || !dst.flush()) throw InputError("cannot write " + opts.out.string());
    for (std::size_t k = 0; k < file.layers.size(); ++k) {
      const auto& layer = file.layers[k];
      out << "layer " << (k + 1) << ": " << layer.bank.per_class.size() << " labels, "
          << layer.catalog.vocab().size() << " symbols, window " << layer.catalog.window() << ", vocab "
          << format_hash(layer.catalog.vocab().hash()) << '\n';
      for (const auto& [label, model] : layer.bank.per_class) out << "  " << label << '\n';
    }
    return kExitOk;
  });
}

int cmd_recognize(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto session = load(opts);
    write_messages(execute(session, nullptr), session.config.output, out);
    return kExitOk;
  });
}

int cmd_explain(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto session = load(opts);
    out << "events: " << session.events.size() << '\n';
    out << "architecture: " << to_char(session.config.architecture) << '\n';
    for (std::size_t k = 0; k < session.stack.layers.size(); ++k) {
      const auto& layer = session.stack.layers[k];
      out << "layer " << (k + 1) << ": " << layer.catalog.labels().size() << " labels, "
          << layer.catalog.vocab().size() << " symbols, " << to_string(layer.windowing.kind) << " w="
          << layer.windowing.width << '\n';
    }
    Trace trace;
    const auto messages = execute(session, &trace);
    out << trace.str();
    out << "messages: " << messages.size() << '\n';
    for (const auto& m : messages) out << "  " << to_table_row(m) << '\n';
    return kExitOk;
  });
}

}  // namespace gahmm::cli
