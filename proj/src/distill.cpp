#include "strux/distill.hpp"

#include <algorithm>
#include <map>

#include "strux/error.hpp"
#include "strux/jsonl.hpp"
#include "strux/prompt.hpp"
#include "strux/renderer.hpp"
#include "strux/struct_parser.hpp"

namespace strux {

namespace {

size_t histogram_bin(double value) {
  const auto bin = static_cast<size_t>(value * 10.0);
  return std::min<size_t>(bin, 9);
}

struct ScoredRecord {
  const StructurizeRecord* record = nullptr;
  double lexical_recall = 0.0;
  std::optional<double> semantic_f1;
};

}  // namespace

DatasetStats build_sft_dataset(const std::vector<StructurizeRecord>& records,
                               const FilterPolicy& policy, const std::string& out_path,
                               const TokenEmbedder* embedder,
                               const std::string& instruction_asset) {
  if (policy.min_semantic_f1 && !embedder)
    throw Error(ErrorKind::MissingEmbedder,
                "min_semantic_f1 requires a TokenEmbedder implementation");
  if (policy.min_semantic_f1 &&
      (*policy.min_semantic_f1 < 0.0 || *policy.min_semantic_f1 > 1.0))
    throw Error(ErrorKind::ConfigError, "min_semantic_f1 must lie in [0,1]");
  if (policy.min_lexical_recall &&
      (*policy.min_lexical_recall < 0.0 || *policy.min_lexical_recall > 1.0))
    throw Error(ErrorKind::ConfigError, "min_lexical_recall must lie in [0,1]");

  DatasetStats stats;
  stats.input_count = records.size();
  if (policy.min_semantic_f1) stats.semantic_f1_hist.assign(10, 0);

  // Failed records carry no tree, so nothing can be emitted for them either
  // way; drop_failed=false only changes whether that is the policy's intent.
  std::vector<ScoredRecord> survivors;
  for (const StructurizeRecord& rec : records) {
    if (!rec.ok()) {
      ++stats.dropped_failed;
      continue;
    }
    ScoredRecord scored;
    scored.record = &rec;
    scored.lexical_recall = lexical_eval(*rec.context, rec.input_text).recall;
    ++stats.lexical_recall_hist[histogram_bin(scored.lexical_recall)];
    if (policy.min_semantic_f1) {
      scored.semantic_f1 = semantic_eval(*rec.context, rec.input_text, *embedder).f1;
      ++stats.semantic_f1_hist[histogram_bin(*scored.semantic_f1)];
    }
    bool below_threshold = false;
    if (policy.min_lexical_recall && scored.lexical_recall < *policy.min_lexical_recall)
      below_threshold = true;
    if (policy.min_semantic_f1 && *scored.semantic_f1 < *policy.min_semantic_f1)
      below_threshold = true;
    if (below_threshold) {
      ++stats.dropped_threshold;
      continue;
    }
    survivors.push_back(std::move(scored));
  }

  // Collapse duplicates to the max-lexical-recall instance, then order by
  // source_hash for byte-stable output.
  std::map<std::string, ScoredRecord> by_hash;
  if (policy.dedupe_by_source_hash) {
    for (const ScoredRecord& scored : survivors) {
      const std::string& hash = scored.record->meta.source_hash;
      auto it = by_hash.find(hash);
      if (it == by_hash.end()) {
        by_hash.emplace(hash, scored);
      } else {
        ++stats.dropped_dupe;
        if (scored.lexical_recall > it->second.lexical_recall) it->second = scored;
      }
    }
  } else {
    size_t suffix = 0;
    for (const ScoredRecord& scored : survivors) {
      char key[16];
      std::snprintf(key, sizeof(key), "#%09zu", suffix++);
      by_hash.emplace(scored.record->meta.source_hash + key, scored);
    }
  }

  const std::string instruction =
      instruction_asset.empty() ? PromptTemplates::builtin().instruction : instruction_asset;
  JsonlWriter writer(out_path);
  for (const auto& [hash, scored] : by_hash) {
    Json line;
    line["instruction"] = instruction;
    line["input"] = scored.record->input_text;
    line["output"] = canonical_json(*scored.record->context);
    writer.write(line);
    ++stats.kept;
  }
  writer.finalize();

  Json sidecar;
  sidecar["input_count"] = stats.input_count;
  sidecar["kept"] = stats.kept;
  sidecar["dropped_failed"] = stats.dropped_failed;
  sidecar["dropped_threshold"] = stats.dropped_threshold;
  sidecar["dropped_dupe"] = stats.dropped_dupe;
  sidecar["lexical_recall_hist"] = stats.lexical_recall_hist;
  if (policy.min_semantic_f1)
    sidecar["semantic_f1_hist"] = stats.semantic_f1_hist;
  write_json_file(out_path + ".stats.json", sidecar);
  return stats;
}

SftFileReport validate_sft_file(const std::string& path,
                                const std::string& expected_instruction) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);

  SftFileReport report;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    ++report.line_count;
    const std::string where = "line " + std::to_string(line_number);

    Json node = Json::parse(line, nullptr, false);
    if (node.is_discarded() || !node.is_object()) {
      report.violations.push_back({where, "not a JSON object", Severity::Error});
      continue;
    }
    bool fields_ok = true;
    for (const char* field : {"instruction", "input", "output"}) {
      if (!node.contains(field) || !node[field].is_string()) {
        report.violations.push_back(
            {where, std::string("missing or non-string field '") + field + "'",
             Severity::Error});
        fields_ok = false;
      }
    }
    if (!fields_ok) continue;

    if (!expected_instruction.empty() &&
        node["instruction"].get<std::string>() != expected_instruction)
      report.violations.push_back(
          {where, "instruction does not match the shipped zero-shot asset", Severity::Error});

    const ParseOutcome outcome = parse_output(node["output"].get<std::string>());
    if (outcome.status != ParseStatus::Parsed)
      report.violations.push_back(
          {where, "output is not canonical structurization JSON", Severity::Error});
  }
  return report;
}

}  // namespace strux
