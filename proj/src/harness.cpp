#include "strux/harness.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>
#include <sstream>

#include "strux/error.hpp"
#include "strux/struct_parser.hpp"

namespace strux {

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string lower_ascii(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Json stats_to_json(const GatewayStats& stats) {
  Json node;
  node["transport_calls"] = stats.transport_calls;
  node["attempts"] = stats.attempts;
  node["retries"] = stats.retries;
  node["cache_hits"] = stats.cache_hits;
  node["cache_writes"] = stats.cache_writes;
  return node;
}

GatewayStats stats_from_json(const Json& node) {
  GatewayStats stats;
  stats.transport_calls = node.value("transport_calls", int64_t{0});
  stats.attempts = node.value("attempts", int64_t{0});
  stats.retries = node.value("retries", int64_t{0});
  stats.cache_hits = node.value("cache_hits", int64_t{0});
  stats.cache_writes = node.value("cache_writes", int64_t{0});
  return stats;
}

// Mean per metric over the samples that carry it.
std::map<std::string, double> aggregate_scores(const std::vector<SampleResult>& samples) {
  std::map<std::string, std::pair<double, size_t>> sums;
  for (const SampleResult& s : samples)
    for (const auto& [metric, value] : s.scores) {
      sums[metric].first += value;
      sums[metric].second += 1;
    }
  std::map<std::string, double> out;
  for (const auto& [metric, sum] : sums) out[metric] = sum.first / static_cast<double>(sum.second);
  return out;
}

GatewayStats subtract_stats(const GatewayStats& after, const GatewayStats& before) {
  return {after.transport_calls - before.transport_calls, after.attempts - before.attempts,
          after.retries - before.retries, after.cache_hits - before.cache_hits,
          after.cache_writes - before.cache_writes};
}

}  // namespace

std::string truncate_text_middle(const std::string& text, size_t max_tokens) {
  const std::vector<std::string> tokens = whitespace_tokens(text);
  if (tokens.size() <= max_tokens) return text;
  return join_tokens(truncate_middle(tokens, max_tokens));
}

const char* augmentation_name(Augmentation aug) {
  switch (aug) {
    case Augmentation::None: return "none";
    case Augmentation::Structurize: return "structurize";
    case Augmentation::Abs: return "abs";
    case Augmentation::Qbs: return "qbs";
  }
  return "none";
}

std::optional<Augmentation> augmentation_from_name(std::string_view name) {
  if (name == "none") return Augmentation::None;
  if (name == "structurize") return Augmentation::Structurize;
  if (name == "abs") return Augmentation::Abs;
  if (name == "qbs") return Augmentation::Qbs;
  return std::nullopt;
}

std::string qa_judge_prompt_text(const std::string& context, const std::string& question) {
  std::string out = "Answer the question based on the given context. "
                    "Reply with the answer only, as briefly as possible, with no explanation.\n\n";
  out += "Context:\n" + context + "\n\n";
  out += "Question: " + question + "\n\nAnswer:";
  return out;
}

std::string attr_judge_prompt_text(const std::string& claim, const std::string& reference,
                                   bool cot) {
  std::string out;
  if (cot) {
    out += "Verify the claim step by step: first identify what the claim asserts, then compare "
           "each assertion with the statements of the reference in order, and only then decide. "
           "Carefully read the claim and double-check the answer.\n\n";
  }
  out += "You are given a claim and a reference. Judge whether the reference supports the "
         "claim and answer with exactly one label:\n"
         "- Attributable: the reference fully supports the claim.\n"
         "- Contradictory: the reference contradicts the claim.\n"
         "- Extrapolatory: the reference lacks the information needed to verify the claim.\n\n";
  out += "Claim: " + claim + "\n\n";
  out += "Reference:\n" + reference + "\n\n";
  out += "Label:";
  return out;
}

std::optional<std::string> extract_attr_label(const std::string& response) {
  const std::string lowered = lower_ascii(response);
  size_t best_pos = std::string::npos;
  std::string best_label;
  for (const std::string& label : attribution_labels()) {
    const size_t pos = lowered.find(lower_ascii(label));
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best_label = label;
    }
  }
  if (best_pos == std::string::npos) return std::nullopt;
  return best_label;
}

BenchReport run_qa_bench(const std::vector<QaSample>& samples, Gateway& judge,
                         const QaBenchOptions& options) {
  if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no QA samples to run");
  Gateway& augmenter = options.augmenter ? *options.augmenter : judge;
  const GatewayStats judge_before = judge.stats();
  const GatewayStats aug_before = augmenter.stats();

  BenchReport report;
  report.kind = "qa";
  report.model_id = judge.config().model_id;
  report.augmentation = augmentation_name(options.augmentation);
  report.window_tokens = static_cast<int>(options.window_tokens);
  report.token_counter = options.token_counter_name;
  report.created_at = iso8601_now();
  report.samples.resize(samples.size());

  std::mutex counter_mutex;
  judge.parallel_for(samples.size(), [&](size_t i) {
    const QaSample& sample = samples[i];
    SampleResult result;
    result.sample_id = sample.sample_id;

    std::string context = sample.context;
    bool fell_back = false;
    switch (options.augmentation) {
      case Augmentation::None:
        break;
      case Augmentation::Structurize: {
        // Per-sample provider hiccups and parse failures fall back to the
        // original text; auth/config errors stay fatal and abort the run.
        try {
          StructurizeRecord rec =
              augmenter.structurize(sample.context, options.struct_mode, sample.sample_id);
          if (rec.ok()) {
            context = render(*rec.context, RenderStyle::NestedNumbered);
            result.scores["aug_lexical_recall"] = lexical_eval(*rec.context, sample.context).recall;
          } else {
            fell_back = true;
            result.diagnostics.push_back("structurization failed; using original context");
          }
        } catch (const ProviderError& e) {
          fell_back = true;
          result.diagnostics.push_back(std::string("structurization error: ") + e.what());
        }
        break;
      }
      case Augmentation::Abs:
      case Augmentation::Qbs: {
        try {
          const PromptBundle prompt =
              options.augmentation == Augmentation::Abs
                  ? build_baseline_prompt(sample.context, PromptMode::AbsBaseline)
                  : build_baseline_prompt(sample.context, PromptMode::QbsBaseline,
                                          sample.question);
          const std::string summary = augmenter.complete(prompt);
          context = sample.context + "\n\n" + summary;
        } catch (const ProviderError& e) {
          fell_back = true;
          result.diagnostics.push_back(std::string("summarization error: ") + e.what());
        }
        break;
      }
    }

    const std::string truncated = truncate_text_middle(context, options.window_tokens);
    bool provider_failed = false;
    try {
      PromptBundle prompt{{Message{Role::User, qa_judge_prompt_text(truncated, sample.question)}}};
      result.predicted = judge.complete(prompt);
      result.scores["qa_f1"] = qa_f1(result.predicted, sample.gold_answers);
      double best_rouge = 0.0;
      for (const std::string& gold : sample.gold_answers)
        best_rouge = std::max(best_rouge, rouge_l(result.predicted, gold).f1);
      result.scores["rouge_l_f1"] = best_rouge;
    } catch (const ProviderError& e) {
      provider_failed = true;
      result.scores["qa_f1"] = 0.0;
      result.scores["rouge_l_f1"] = 0.0;
      result.diagnostics.push_back(std::string("judge error: ") + e.what());
    }

    {
      std::lock_guard lock(counter_mutex);
      report.fallback_count += fell_back;
      report.provider_failure_count += provider_failed;
    }
    report.samples[i] = std::move(result);
  });

  report.aggregate = aggregate_scores(report.samples);
  GatewayStats stats = subtract_stats(judge.stats(), judge_before);
  if (&augmenter != &judge) {
    const GatewayStats aug = subtract_stats(augmenter.stats(), aug_before);
    stats.transport_calls += aug.transport_calls;
    stats.attempts += aug.attempts;
    stats.retries += aug.retries;
    stats.cache_hits += aug.cache_hits;
    stats.cache_writes += aug.cache_writes;
  }
  report.stats = stats;
  return report;
}

BenchReport run_attr_bench(const std::vector<AttrSample>& samples, Gateway& judge,
                           const AttrBenchOptions& options) {
  if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no attribution samples to run");
  Gateway& augmenter = options.augmenter ? *options.augmenter : judge;
  const GatewayStats judge_before = judge.stats();
  const GatewayStats aug_before = augmenter.stats();

  BenchReport report;
  report.kind = "attr";
  report.model_id = judge.config().model_id;
  report.augmentation = options.augment ? "structurize" : "none";
  report.created_at = iso8601_now();
  report.samples.resize(samples.size());

  std::vector<std::string> predictions(samples.size());
  std::mutex counter_mutex;
  judge.parallel_for(samples.size(), [&](size_t i) {
    const AttrSample& sample = samples[i];
    SampleResult result;
    result.sample_id = sample.sample_id;

    std::string reference = sample.reference;
    bool fell_back = false;
    if (options.augment) {
      try {
        StructurizeRecord rec =
            augmenter.structurize(sample.reference, options.struct_mode, sample.sample_id);
        if (rec.ok()) {
          reference = render(*rec.context, RenderStyle::Enumerated);
        } else {
          fell_back = true;
          result.diagnostics.push_back("structurization failed; using original reference");
        }
      } catch (const ProviderError& e) {
        fell_back = true;
        result.diagnostics.push_back(std::string("structurization error: ") + e.what());
      }
    }

    std::string predicted = "Unparsed";
    bool provider_failed = false;
    bool unparsed = false;
    try {
      PromptBundle prompt{
          {Message{Role::User, attr_judge_prompt_text(sample.claim, reference, options.cot)}}};
      const std::string response = judge.complete(prompt);
      if (auto label = extract_attr_label(response)) {
        predicted = *label;
      } else {
        unparsed = true;
        result.diagnostics.push_back("no label found in judge response");
      }
    } catch (const ProviderError& e) {
      provider_failed = true;
      result.diagnostics.push_back(std::string("judge error: ") + e.what());
    }

    result.predicted = predicted;
    const double correct = predicted == sample.gold_label ? 1.0 : 0.0;
    result.scores["correct"] = correct;
    result.scores["acc_" + lower_ascii(sample.gold_label)] = correct;

    {
      std::lock_guard lock(counter_mutex);
      report.fallback_count += fell_back;
      report.provider_failure_count += provider_failed;
      report.unparsed_count += unparsed;
    }
    predictions[i] = predicted;
    report.samples[i] = std::move(result);
  });

  report.aggregate = aggregate_scores(report.samples);
  std::vector<std::string> golds;
  golds.reserve(samples.size());
  for (const AttrSample& s : samples) golds.push_back(s.gold_label);
  const ClassAccuracy accuracy = per_class_accuracy(predictions, golds, attribution_labels());
  report.aggregate["macro_accuracy"] = accuracy.macro;

  GatewayStats stats = subtract_stats(judge.stats(), judge_before);
  if (&augmenter != &judge) {
    const GatewayStats aug = subtract_stats(augmenter.stats(), aug_before);
    stats.transport_calls += aug.transport_calls;
    stats.attempts += aug.attempts;
    stats.retries += aug.retries;
    stats.cache_hits += aug.cache_hits;
    stats.cache_writes += aug.cache_writes;
  }
  report.stats = stats;
  return report;
}

std::vector<std::pair<std::string, std::string>> flatten_corpus(
    const std::vector<StructurizeRecord>& records) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(records.size());
  for (const StructurizeRecord& rec : records) {
    if (rec.ok())
      out.emplace_back(rec.meta.source_id, render(*rec.context, RenderStyle::Flattened));
    else
      out.emplace_back(rec.meta.source_id, rec.input_text);
  }
  return out;
}

DeltaReport app_eval_delta(const BenchReport& baseline, const BenchReport& augmented) {
  std::set<std::string> base_ids;
  std::set<std::string> aug_ids;
  for (const SampleResult& s : baseline.samples) base_ids.insert(s.sample_id);
  for (const SampleResult& s : augmented.samples) aug_ids.insert(s.sample_id);
  if (base_ids != aug_ids)
    throw Error(ErrorKind::SampleSetMismatch,
                "baseline and augmented reports cover different sample ids");

  DeltaReport delta;
  delta.baseline = baseline.aggregate;
  delta.augmented = augmented.aggregate;
  for (const auto& [metric, value] : augmented.aggregate) {
    auto it = baseline.aggregate.find(metric);
    if (it != baseline.aggregate.end()) delta.delta[metric] = value - it->second;
  }

  std::map<std::string, const SampleResult*> base_by_id;
  for (const SampleResult& s : baseline.samples) base_by_id[s.sample_id] = &s;
  for (const SampleResult& s : augmented.samples) {
    const SampleResult* base = base_by_id.at(s.sample_id);
    for (const auto& [metric, value] : s.scores) {
      auto it = base->scores.find(metric);
      if (it != base->scores.end())
        delta.per_sample_delta[metric][s.sample_id] = value - it->second;
    }
  }
  return delta;
}

HumanEvalExportStats export_human_eval_tasks(const std::vector<StructurizeRecord>& records,
                                             const std::string& out_path) {
  HumanEvalExportStats stats;
  JsonlWriter writer(out_path);
  size_t index = 0;
  for (const StructurizeRecord& rec : records) {
    ++index;
    if (!rec.ok()) {
      ++stats.excluded;
      continue;
    }
    Json line;
    line["task_id"] =
        rec.meta.source_id.empty() ? "task-" + std::to_string(index) : rec.meta.source_id;
    line["source_text"] = rec.input_text;
    line["structured_render"] = render(*rec.context, RenderStyle::Enumerated);
    line["dimensions"] = Json::array({"completeness", "factuality", "anti_hallucination"});
    line["scale"] = Json{{"min", 0}, {"max", 5}};
    writer.write(line);
    ++stats.exported;
  }
  writer.finalize();

  Json summary;
  summary["exported_count"] = stats.exported;
  summary["excluded_count"] = stats.excluded;
  write_json_file(out_path + ".summary.json", summary);
  return stats;
}

Json BenchReport::to_json() const {
  Json node;
  Json samples_node = Json::array();
  for (const SampleResult& s : samples) {
    Json sn;
    sn["sample_id"] = s.sample_id;
    sn["scores"] = s.scores;
    sn["predicted"] = s.predicted;
    sn["diagnostics"] = s.diagnostics;
    samples_node.push_back(std::move(sn));
  }
  node["samples"] = std::move(samples_node);
  node["aggregate"] = aggregate;
  Json meta;
  meta["kind"] = kind;
  meta["model_id"] = model_id;
  meta["augmentation"] = augmentation;
  meta["window_tokens"] = window_tokens;
  meta["token_counter"] = token_counter;
  meta["created_at"] = created_at;
  meta["fallback_count"] = fallback_count;
  meta["provider_failure_count"] = provider_failure_count;
  meta["unparsed_count"] = unparsed_count;
  meta["stats"] = stats_to_json(stats);
  node["meta"] = std::move(meta);
  return node;
}

BenchReport BenchReport::from_json(const Json& node) {
  BenchReport report;
  for (const Json& sn : node.at("samples")) {
    SampleResult s;
    s.sample_id = sn.at("sample_id").get<std::string>();
    if (sn.contains("scores"))
      for (auto it = sn["scores"].begin(); it != sn["scores"].end(); ++it)
        s.scores[it.key()] = it.value().get<double>();
    s.predicted = sn.value("predicted", "");
    if (sn.contains("diagnostics"))
      for (const Json& d : sn["diagnostics"]) s.diagnostics.push_back(d.get<std::string>());
    report.samples.push_back(std::move(s));
  }
  if (node.contains("aggregate"))
    for (auto it = node["aggregate"].begin(); it != node["aggregate"].end(); ++it)
      report.aggregate[it.key()] = it.value().get<double>();
  if (node.contains("meta")) {
    const Json& meta = node["meta"];
    report.kind = meta.value("kind", "");
    report.model_id = meta.value("model_id", "");
    report.augmentation = meta.value("augmentation", "");
    report.window_tokens = meta.value("window_tokens", 0);
    report.token_counter = meta.value("token_counter", "");
    report.created_at = meta.value("created_at", "");
    report.fallback_count = meta.value("fallback_count", size_t{0});
    report.provider_failure_count = meta.value("provider_failure_count", size_t{0});
    report.unparsed_count = meta.value("unparsed_count", size_t{0});
    if (meta.contains("stats")) report.stats = stats_from_json(meta["stats"]);
  }
  return report;
}

Json DeltaReport::to_json() const {
  Json node;
  node["baseline"] = baseline;
  node["augmented"] = augmented;
  node["delta"] = delta;
  node["per_sample_delta"] = per_sample_delta;
  return node;
}

TrecRun load_trec_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read run file " + path);
  TrecRun run;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    std::string part;
    while (fields >> part) parts.push_back(part);
    std::string query_id, doc_id;
    long rank = 0;
    double score = 0.0;
    try {
      if (parts.size() == 4) {
        query_id = parts[0];
        doc_id = parts[1];
        rank = std::stol(parts[2]);
        score = std::stod(parts[3]);
      } else if (parts.size() == 6) {  // query_id Q0 doc_id rank score tag
        query_id = parts[0];
        doc_id = parts[2];
        rank = std::stol(parts[3]);
        score = std::stod(parts[4]);
      } else {
        throw std::invalid_argument("field count");
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::IoError,
                  path + ":" + std::to_string(line_number) + ": malformed run line");
    }
    run[query_id].push_back({doc_id, rank, score});
  }
  for (auto& [query_id, entries] : run)
    std::stable_sort(entries.begin(), entries.end(),
                     [](const TrecRunEntry& a, const TrecRunEntry& b) { return a.rank < b.rank; });
  return run;
}

TrecQrels load_trec_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read qrels file " + path);
  TrecQrels qrels;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    std::string part;
    while (fields >> part) parts.push_back(part);
    try {
      if (parts.size() == 3) {
        qrels[parts[0]][parts[1]] = std::stod(parts[2]);
      } else if (parts.size() == 4) {  // query_id iteration doc_id rel
        qrels[parts[0]][parts[2]] = std::stod(parts[3]);
      } else {
        throw std::invalid_argument("field count");
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::IoError,
                  path + ":" + std::to_string(line_number) + ": malformed qrels line");
    }
  }
  return qrels;
}

RunScore score_trec_run(const TrecRun& run, const TrecQrels& qrels, size_t k) {
  RunScore result;
  double sum = 0.0;
  for (const auto& [query_id, entries] : run) {
    auto judged = qrels.find(query_id);
    if (judged == qrels.end()) {
      ++result.skipped_queries;
      continue;
    }
    std::vector<double> ranked;
    ranked.reserve(entries.size());
    for (const TrecRunEntry& e : entries) {
      auto rel = judged->second.find(e.doc_id);
      ranked.push_back(rel == judged->second.end() ? 0.0 : rel->second);
    }
    std::vector<double> ideal;
    ideal.reserve(judged->second.size());
    for (const auto& [doc_id, rel] : judged->second) ideal.push_back(rel);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());

    const double idcg = dcg_at_k(ideal, k);
    const double ndcg = idcg > 0.0 ? dcg_at_k(ranked, k) / idcg : 0.0;
    result.per_query[query_id] = ndcg;
    sum += ndcg;
    ++result.evaluated_queries;
  }
  result.mean = result.evaluated_queries
                    ? sum / static_cast<double>(result.evaluated_queries)
                    : 0.0;
  return result;
}

std::vector<QaSample> load_qa_samples(const std::string& path) {
  std::vector<QaSample> samples;
  size_t index = 0;
  for (const Json& node : read_jsonl(path)) {
    ++index;
    QaSample s;
    s.sample_id = node.value("sample_id", "sample-" + std::to_string(index));
    s.context = node.at("context").get<std::string>();
    s.question = node.at("question").get<std::string>();
    for (const Json& a : node.at("answers")) s.gold_answers.push_back(a.get<std::string>());
    if (is_blank(s.context) || is_blank(s.question) || s.gold_answers.empty())
      throw Error(ErrorKind::IoError, path + ": QA sample " + s.sample_id +
                                          " lacks context, question, or answers");
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<AttrSample> load_attr_samples(const std::string& path) {
  std::vector<AttrSample> samples;
  size_t index = 0;
  for (const Json& node : read_jsonl(path)) {
    ++index;
    AttrSample s;
    s.sample_id = node.value("sample_id", "sample-" + std::to_string(index));
    s.claim = node.at("claim").get<std::string>();
    s.reference = node.at("reference").get<std::string>();
    const std::string label = node.at("label").get<std::string>();
    auto extracted = extract_attr_label(label);
    if (!extracted || lower_ascii(*extracted) != lower_ascii(label))
      throw Error(ErrorKind::UnknownLabel,
                  path + ": sample " + s.sample_id + " has unknown label '" + label + "'");
    s.gold_label = *extracted;
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<StructurizeRecord> load_records(const std::string& path) {
  std::vector<StructurizeRecord> records;
  for (const Json& node : read_jsonl(path)) {
    if (node.contains("truncated")) continue;  // interruption marker line
    records.push_back(record_from_json(node));
  }
  return records;
}

std::vector<SourceText> load_corpus(const std::string& path) {
  std::vector<SourceText> corpus;
  size_t index = 0;
  for (const Json& node : read_jsonl(path)) {
    ++index;
    SourceText item;
    item.id = node.value("doc_id", "doc-" + std::to_string(index));
    item.text = node.at("text").get<std::string>();
    corpus.push_back(std::move(item));
  }
  return corpus;
}

}  // namespace strux
