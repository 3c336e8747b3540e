#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gahmm/model_store.hpp"
#include "gahmm/pipelines.hpp"

namespace gahmm::cli {

enum class OutputFormat { Json, Table };

// Settings for one layer; keys given before the first [layer] section act as defaults.
struct LayerSettings {
  std::optional<std::filesystem::path> catalog;  // checked against the bank's vocabulary hash
  std::optional<Architecture> architecture;
  WindowCase window = WindowCase::Sliding;
  Decoder decoder = Decoder::PerClass;
  AcceptanceFloor floor;
  double min_confidence = 0.0;
  std::size_t max_passes = 16;
  FilterConfig filters;
};

struct RunConfig {
  Architecture architecture = Architecture::Cascaded;
  ContextMode context_mode = ContextMode::PerEntity;
  std::vector<std::string> context_tags;
  OutputFormat output = OutputFormat::Json;
  bool fuse = false;
  std::optional<double> alpha;
  LayerSettings defaults;
  std::vector<LayerSettings> layers;  // explicit [layer] sections, in order
};

// Parses the INI-style run configuration. Relative catalog paths resolve against base_dir.
// Throws ConfigError with the offending line.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});

// Binds a configuration to a trained bank. Throws ConfigError on any mismatch.
LayerStack build_stack(const RunConfig& config, const BankFile& bank);

}  // namespace gahmm::cli
