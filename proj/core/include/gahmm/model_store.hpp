#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gahmm/hmm.hpp"
#include "gahmm/ontology_catalog.hpp"

namespace gahmm {

struct TrainedLayer {
  Catalog catalog;
  ModelBank bank;
};

// Everything `train` persists: one catalog and its models per layer.
struct BankFile {
  std::vector<TrainedLayer> layers;
};

inline constexpr int kBankFormatVersion = 1;

/// Human-readable, versioned layout:
///
///   gahmm-bank 1
///   layers <count>
///   layer <k>
///   vocab_hash <16 hex digits>
///   smoothing <real>
///   self_loop <real>
///   catalog <line count>
///   ...rendered catalog lines...
///   classes <count>
///   class <label>
///   <model>
///   label_state
///   <model>
///   end_layer
///
/// where <model> is `states N symbols M`, N `state <name>` lines,
/// `initial p...`, `transition` + N rows, `emission` + N rows. Reals are
/// written with 17 significant digits so reading returns identical doubles.
std::string serialize_bank(const BankFile& bank);
BankFile parse_bank(std::string_view text);

std::string serialize_model(const HmmModel& model);
HmmModel parse_model(std::string_view text);

std::string format_hash(std::uint64_t hash);

}  // namespace gahmm
