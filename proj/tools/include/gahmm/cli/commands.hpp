#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gahmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConfig = 3;

struct TrainOptions {
  std::vector<std::filesystem::path> catalogs;  // one per layer, bottom first
  std::filesystem::path out;
  double alpha = 0.1;
  double self_loop = 0.6;
};

struct RunOptions {
  std::filesystem::path events;
  std::filesystem::path bank;
  std::optional<std::filesystem::path> config;
};

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int cmd_recognize(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_explain(const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace gahmm::cli
