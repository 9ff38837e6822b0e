#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strux/gateway.hpp"
#include "strux/jsonl.hpp"
#include "strux/metrics.hpp"
#include "strux/renderer.hpp"

namespace strux {

struct QaSample {
  std::string sample_id;
  std::string context;
  std::string question;
  std::vector<std::string> gold_answers;
};

inline const std::vector<std::string>& attribution_labels() {
  static const std::vector<std::string> labels{"Attributable", "Contradictory", "Extrapolatory"};
  return labels;
}

struct AttrSample {
  std::string sample_id;
  std::string claim;
  std::string reference;
  std::string gold_label;  // one of attribution_labels()
};

struct SampleResult {
  std::string sample_id;
  std::map<std::string, double> scores;
  std::string predicted;  // judge answer (QA) or extracted label (attr)
  std::vector<std::string> diagnostics;
};

/// Per-sample scores plus their arithmetic means. Metrics absent on a sample
/// (e.g. augmentation recall after a fallback) are averaged over the samples
/// that carry them. macro_accuracy is derived from the per-class aggregates.
struct BenchReport {
  std::vector<SampleResult> samples;
  std::map<std::string, double> aggregate;
  // run metadata
  std::string kind;  // "qa" | "attr"
  std::string model_id;
  std::string augmentation;
  int window_tokens = 0;
  std::string token_counter;
  std::string created_at;
  size_t fallback_count = 0;          // samples where augmentation fell back
  size_t provider_failure_count = 0;  // judge calls that errored (scored 0)
  size_t unparsed_count = 0;          // attr responses with no extractable label
  GatewayStats stats;

  Json to_json() const;
  static BenchReport from_json(const Json& node);
};

struct DeltaReport {
  std::map<std::string, double> baseline;
  std::map<std::string, double> augmented;
  std::map<std::string, double> delta;  // augmented - baseline
  std::map<std::string, std::map<std::string, double>> per_sample_delta;  // metric -> id -> diff

  Json to_json() const;
};

/// Middle truncation: keeps the first ceil(max_len/2) and last floor(max_len/2)
/// elements when the input is longer than max_len.
template <typename T>
std::vector<T> truncate_middle(const std::vector<T>& items, size_t max_len) {
  if (items.size() <= max_len) return items;
  const size_t head = (max_len + 1) / 2;
  const size_t tail = max_len / 2;
  std::vector<T> out;
  out.reserve(max_len);
  out.insert(out.end(), items.begin(), items.begin() + head);
  out.insert(out.end(), items.end() - tail, items.end());
  return out;
}

/// Splits on whitespace, truncates in the middle, re-joins with single
/// spaces. Texts within the window pass through untouched.
std::string truncate_text_middle(const std::string& text, size_t max_tokens);

enum class Augmentation { None, Structurize, Abs, Qbs };

const char* augmentation_name(Augmentation aug);
std::optional<Augmentation> augmentation_from_name(std::string_view name);

using TokenCounter = std::function<size_t(const std::string&)>;

struct QaBenchOptions {
  Augmentation augmentation = Augmentation::None;
  size_t window_tokens = 3500;
  PromptMode struct_mode = PromptMode::ZeroShot;
  Gateway* augmenter = nullptr;  // defaults to the judge gateway
  std::string token_counter_name = "whitespace";
};

std::string qa_judge_prompt_text(const std::string& context, const std::string& question);

BenchReport run_qa_bench(const std::vector<QaSample>& samples, Gateway& judge,
                         const QaBenchOptions& options);

struct AttrBenchOptions {
  bool augment = false;
  bool cot = false;
  PromptMode struct_mode = PromptMode::ZeroShot;
  Gateway* augmenter = nullptr;
};

std::string attr_judge_prompt_text(const std::string& claim, const std::string& reference,
                                   bool cot);

/// First case-insensitive occurrence among the three labels; nullopt when
/// none occurs (scored as Unparsed).
std::optional<std::string> extract_attr_label(const std::string& response);

BenchReport run_attr_bench(const std::vector<AttrSample>& samples, Gateway& judge,
                           const AttrBenchOptions& options);

/// Parsed/Repaired records render Flattened; Failed records fall back to the
/// original text. Output aligned one-to-one with the input.
std::vector<std::pair<std::string, std::string>> flatten_corpus(
    const std::vector<StructurizeRecord>& records);

/// Throws Error(SampleSetMismatch) when the two reports cover different
/// sample ids. Deltas are taken over the metrics both reports share.
DeltaReport app_eval_delta(const BenchReport& baseline, const BenchReport& augmented);

struct HumanEvalExportStats {
  size_t exported = 0;
  size_t excluded = 0;
};

/// One task line per Parsed/Repaired record; Failed records are excluded and
/// counted in the sidecar summary written next to the output file.
HumanEvalExportStats export_human_eval_tasks(const std::vector<StructurizeRecord>& records,
                                             const std::string& out_path);

// TREC-style retrieval-run scoring ------------------------------------------

struct TrecRunEntry {
  std::string doc_id;
  long rank = 0;
  double score = 0.0;
};

using TrecRun = std::map<std::string, std::vector<TrecRunEntry>>;      // query -> ranked docs
using TrecQrels = std::map<std::string, std::map<std::string, double>>;  // query -> doc -> rel

/// Lines "query_id doc_id rank score"; the 6-column TREC format with the Q0
/// and tag fields is also accepted.
TrecRun load_trec_run(const std::string& path);
/// Lines "query_id doc_id rel"; the 4-column "query_id 0 doc_id rel" form is
/// also accepted.
TrecQrels load_trec_qrels(const std::string& path);

struct RunScore {
  std::map<std::string, double> per_query;
  double mean = 0.0;
  size_t evaluated_queries = 0;
  size_t skipped_queries = 0;  // in the run but absent from the qrels
};

/// nDCG@k per query with the ideal ranking taken from all judged documents
/// of that query, averaged over the queries present in both run and qrels.
RunScore score_trec_run(const TrecRun& run, const TrecQrels& qrels, size_t k);

// Dataset loaders ------------------------------------------------------------

std::vector<QaSample> load_qa_samples(const std::string& path);
std::vector<AttrSample> load_attr_samples(const std::string& path);
std::vector<StructurizeRecord> load_records(const std::string& path);
std::vector<SourceText> load_corpus(const std::string& path);

}  // namespace strux
