#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strux/core.hpp"
#include "strux/metrics.hpp"

namespace strux {

/// One SFT training example. output is the canonical JSON of the parsed
/// tree, never the raw teacher text; instruction is the zero-shot
/// structurization instruction asset.
struct SftPair {
  std::string instruction;
  std::string input;
  std::string output;
};

struct FilterPolicy {
  bool drop_failed = true;
  std::optional<double> min_semantic_f1;
  std::optional<double> min_lexical_recall;
  bool dedupe_by_source_hash = true;
};

struct DatasetStats {
  size_t input_count = 0;
  size_t kept = 0;
  size_t dropped_failed = 0;
  size_t dropped_threshold = 0;
  size_t dropped_dupe = 0;
  std::vector<size_t> lexical_recall_hist = std::vector<size_t>(10, 0);
  std::vector<size_t> semantic_f1_hist;  // filled only when the threshold is set
};

/// Filters records into an SFT JSONL file (one {"instruction","input","output"}
/// object per line, ordered by source_hash) plus a stats sidecar at
/// out_path + ".stats.json". Requires an embedder when min_semantic_f1 is set.
DatasetStats build_sft_dataset(const std::vector<StructurizeRecord>& records,
                               const FilterPolicy& policy, const std::string& out_path,
                               const TokenEmbedder* embedder = nullptr,
                               const std::string& instruction_asset = "");

struct SftFileReport {
  size_t line_count = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Every line must parse as an SftPair whose output round-trips through the
/// struct parser with status Parsed into a valid tree. When
/// expected_instruction is non-empty, the instruction field must match it.
SftFileReport validate_sft_file(const std::string& path,
                                const std::string& expected_instruction = "");

}  // namespace strux
