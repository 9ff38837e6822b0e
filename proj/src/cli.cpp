#include "strux/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "strux/distill.hpp"
#include "strux/error.hpp"
#include "strux/harness.hpp"

namespace strux::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitProviderError = 2;
constexpr int kExitInterrupted = 130;

struct ProviderOptions {
  std::string config_file;
  std::string base_url;
  std::string model;
  std::string api_key_env;
  std::string cache_dir;
  std::string template_dir;
  std::string mock_file;
  int parallelism = 0;
  int max_attempts = 0;
  int max_output_tokens = 0;
  long backoff_ms = -1;
  bool no_cache = false;
};

void add_provider_flags(CLI::App* cmd, ProviderOptions& opts) {
  cmd->add_option("--config", opts.config_file, "JSON run configuration (flags override)");
  cmd->add_option("--base-url", opts.base_url, "Provider base URL");
  cmd->add_option("--model", opts.model, "Model identifier");
  cmd->add_option("--api-key-env", opts.api_key_env, "Env var holding the API key");
  cmd->add_option("--cache-dir", opts.cache_dir, "Response cache directory");
  cmd->add_flag("--no-cache", opts.no_cache, "Disable the response cache");
  cmd->add_option("--template-dir", opts.template_dir, "Prompt template directory");
  cmd->add_option("--mock", opts.mock_file, "Mock provider fixture file (offline mode)");
  cmd->add_option("--parallelism", opts.parallelism, "Max in-flight provider requests");
  cmd->add_option("--max-attempts", opts.max_attempts, "Retry budget per request");
  cmd->add_option("--max-output-tokens", opts.max_output_tokens, "Completion token cap");
  cmd->add_option("--backoff-ms", opts.backoff_ms, "Base backoff in milliseconds");
}

// Flags override config-file values; unknown config keys are rejected.
ProviderConfig resolve_provider_config(const ProviderOptions& opts) {
  ProviderConfig cfg;
  std::string file_template_dir;
  std::string file_mock;
  if (!opts.config_file.empty()) {
    const Json file = read_json_file(opts.config_file);
    if (!file.is_object())
      throw Error(ErrorKind::ConfigError, "config file must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      const std::string& key = it.key();
      if (key == "base_url")
        cfg.base_url = it.value().get<std::string>();
      else if (key == "model")
        cfg.model_id = it.value().get<std::string>();
      else if (key == "api_key_env")
        cfg.api_key_ref = it.value().get<std::string>();
      else if (key == "cache_dir")
        cfg.cache_dir = it.value().get<std::string>();
      else if (key == "parallelism")
        cfg.parallelism = it.value().get<int>();
      else if (key == "max_attempts")
        cfg.max_attempts = it.value().get<int>();
      else if (key == "max_output_tokens")
        cfg.max_output_tokens = it.value().get<int>();
      else if (key == "backoff_ms")
        cfg.backoff_base = std::chrono::milliseconds(it.value().get<long>());
      else if (key == "template_dir")
        file_template_dir = it.value().get<std::string>();
      else if (key == "mock")
        file_mock = it.value().get<std::string>();
      else
        throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
    }
  }
  if (!opts.base_url.empty()) cfg.base_url = opts.base_url;
  if (!opts.model.empty()) cfg.model_id = opts.model;
  if (!opts.api_key_env.empty()) cfg.api_key_ref = opts.api_key_env;
  if (!opts.cache_dir.empty()) cfg.cache_dir = opts.cache_dir;
  if (opts.parallelism > 0) cfg.parallelism = opts.parallelism;
  if (opts.max_attempts > 0) cfg.max_attempts = opts.max_attempts;
  if (opts.max_output_tokens > 0) cfg.max_output_tokens = opts.max_output_tokens;
  if (opts.backoff_ms >= 0) cfg.backoff_base = std::chrono::milliseconds(opts.backoff_ms);
  if (opts.no_cache) cfg.cache_dir.clear();
  return cfg;
}

std::string resolve_template_dir(const ProviderOptions& opts) {
  if (!opts.template_dir.empty()) return opts.template_dir;
  if (!opts.config_file.empty()) {
    const Json file = read_json_file(opts.config_file);
    if (file.is_object() && file.contains("template_dir"))
      return file["template_dir"].get<std::string>();
  }
  return {};
}

std::string resolve_mock_file(const ProviderOptions& opts) {
  if (!opts.mock_file.empty()) return opts.mock_file;
  if (!opts.config_file.empty()) {
    const Json file = read_json_file(opts.config_file);
    if (file.is_object() && file.contains("mock")) return file["mock"].get<std::string>();
  }
  return {};
}

Gateway make_gateway(const ProviderOptions& opts) {
  const ProviderConfig cfg = resolve_provider_config(opts);
  std::shared_ptr<Transport> transport;
  const std::string mock_file = resolve_mock_file(opts);
  if (!mock_file.empty()) transport = MockTransport::from_fixture_file(mock_file);
  const std::string template_dir = resolve_template_dir(opts);
  PromptTemplates templates =
      template_dir.empty() ? PromptTemplates::builtin() : PromptTemplates::load(template_dir);
  return Gateway(cfg, std::move(transport), std::move(templates));
}

void require_input_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorKind::IoError, "input file does not exist: " + path);
}

void print_aggregate_table(const std::map<std::string, double>& aggregate) {
  size_t width = 6;
  for (const auto& [metric, value] : aggregate) width = std::max(width, metric.size());
  for (const auto& [metric, value] : aggregate)
    std::printf("%-*s  %.4f\n", static_cast<int>(width), metric.c_str(), value);
}

void print_stats(const GatewayStats& stats) {
  std::fprintf(stderr,
               "provider: %lld calls, %lld attempts, %lld retries, %lld cache hits, %lld cache writes\n",
               static_cast<long long>(stats.transport_calls), static_cast<long long>(stats.attempts),
               static_cast<long long>(stats.retries), static_cast<long long>(stats.cache_hits),
               static_cast<long long>(stats.cache_writes));
}

// structurize -----------------------------------------------------------------

int cmd_structurize(const ProviderOptions& provider, const std::string& input,
                    const std::string& out, const std::string& mode_name) {
  require_input_file(input);
  const auto mode = prompt_mode_from_name(mode_name);
  if (!mode || (*mode != PromptMode::FewShot && *mode != PromptMode::ZeroShot))
    throw Error(ErrorKind::ConfigError, "--mode must be fewshot or zeroshot");

  Gateway gateway = make_gateway(provider);
  const std::vector<SourceText> corpus = load_corpus(input);
  JsonlWriter writer(out);
  bool interrupted = false;

  const size_t chunk = std::max<size_t>(static_cast<size_t>(gateway.config().parallelism) * 4, 16);
  for (size_t offset = 0; offset < corpus.size() && !interrupted; offset += chunk) {
    const size_t end = std::min(corpus.size(), offset + chunk);
    const std::vector<SourceText> slice(corpus.begin() + offset, corpus.begin() + end);
    const std::vector<StructurizeRecord> records =
        gateway.batch_structurize(slice, *mode);
    for (const StructurizeRecord& rec : records) writer.write(record_to_json(rec));
    interrupted = interrupt_flag().load();
  }
  if (interrupted) writer.write_truncation_marker();
  writer.finalize();
  print_stats(gateway.stats());
  std::fprintf(stderr, "wrote %zu line(s) to %s\n", writer.lines_written(), out.c_str());
  return interrupted ? kExitInterrupted : kExitOk;
}

// render / flatten-corpus ------------------------------------------------------

int cmd_render(const std::string& records_path, const std::string& out,
               const std::string& style_name) {
  require_input_file(records_path);
  const auto style = render_style_from_name(style_name);
  if (!style)
    throw Error(ErrorKind::ConfigError, "--style must be nested, enumerated, or flattened");
  const std::vector<StructurizeRecord> records = load_records(records_path);
  JsonlWriter writer(out);
  for (const StructurizeRecord& rec : records) {
    Json line;
    line["doc_id"] = rec.meta.source_id;
    line["text"] = rec.ok() ? render(*rec.context, *style) : rec.input_text;
    line["fallback"] = !rec.ok();
    writer.write(line);
  }
  writer.finalize();
  return kExitOk;
}

int cmd_flatten_corpus(const std::string& records_path, const std::string& out) {
  require_input_file(records_path);
  const std::vector<StructurizeRecord> records = load_records(records_path);
  const auto flattened = flatten_corpus(records);
  JsonlWriter writer(out);
  for (const auto& [doc_id, text] : flattened) {
    Json line;
    line["doc_id"] = doc_id;
    line["text"] = text;
    writer.write(line);
  }
  writer.finalize();
  return kExitOk;
}

// eval-struct -------------------------------------------------------------------

int cmd_eval_struct(const std::string& records_path, const std::string& out, bool semantic,
                    int embed_dim) {
  require_input_file(records_path);
  const std::vector<StructurizeRecord> records = load_records(records_path);
  HashEmbedder embedder(static_cast<size_t>(embed_dim));

  Json per_record = Json::array();
  double lex_p = 0, lex_r = 0, lex_f = 0, sem_f = 0;
  size_t scored = 0, failed = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    const StructurizeRecord& rec = records[i];
    Json node;
    node["source_id"] = rec.meta.source_id.empty() ? "record-" + std::to_string(i + 1)
                                                   : rec.meta.source_id;
    node["status"] = parse_status_name(rec.status);
    if (!rec.ok()) {
      ++failed;
      per_record.push_back(std::move(node));
      continue;
    }
    const PrfScore lex = lexical_eval(*rec.context, rec.input_text);
    node["lexical"] = Json{{"precision", lex.precision}, {"recall", lex.recall}, {"f1", lex.f1}};
    lex_p += lex.precision;
    lex_r += lex.recall;
    lex_f += lex.f1;
    if (semantic) {
      const PrfScore sem = semantic_eval(*rec.context, rec.input_text, embedder);
      node["semantic"] =
          Json{{"precision", sem.precision}, {"recall", sem.recall}, {"f1", sem.f1}};
      sem_f += sem.f1;
    }
    ++scored;
    per_record.push_back(std::move(node));
  }

  Json report;
  report["records"] = std::move(per_record);
  std::map<std::string, double> aggregate;
  if (scored) {
    aggregate["lexical_precision"] = lex_p / static_cast<double>(scored);
    aggregate["lexical_recall"] = lex_r / static_cast<double>(scored);
    aggregate["lexical_f1"] = lex_f / static_cast<double>(scored);
    if (semantic) aggregate["semantic_f1"] = sem_f / static_cast<double>(scored);
  }
  report["aggregate"] = aggregate;
  report["counts"] = Json{{"total", records.size()}, {"scored", scored}, {"failed", failed}};
  write_json_file(out, report);
  print_aggregate_table(aggregate);
  return kExitOk;
}

// bench-qa / bench-attr ----------------------------------------------------------

int cmd_bench_qa(const ProviderOptions& provider, const std::string& input,
                 const std::string& out, const std::string& augmentation_name_arg,
                 size_t window, const std::string& struct_mode_name) {
  require_input_file(input);
  const auto augmentation = augmentation_from_name(augmentation_name_arg);
  if (!augmentation)
    throw Error(ErrorKind::ConfigError, "--augmentation must be none, structurize, abs, or qbs");
  const auto struct_mode = prompt_mode_from_name(struct_mode_name);
  if (!struct_mode || (*struct_mode != PromptMode::FewShot && *struct_mode != PromptMode::ZeroShot))
    throw Error(ErrorKind::ConfigError, "--struct-mode must be fewshot or zeroshot");

  Gateway gateway = make_gateway(provider);
  const std::vector<QaSample> samples = load_qa_samples(input);
  QaBenchOptions options;
  options.augmentation = *augmentation;
  options.window_tokens = window;
  options.struct_mode = *struct_mode;
  const BenchReport report = run_qa_bench(samples, gateway, options);
  write_json_file(out, report.to_json());
  print_aggregate_table(report.aggregate);
  print_stats(report.stats);
  return kExitOk;
}

int cmd_bench_attr(const ProviderOptions& provider, const std::string& input,
                   const std::string& out, bool augment, bool cot,
                   const std::string& struct_mode_name) {
  require_input_file(input);
  const auto struct_mode = prompt_mode_from_name(struct_mode_name);
  if (!struct_mode || (*struct_mode != PromptMode::FewShot && *struct_mode != PromptMode::ZeroShot))
    throw Error(ErrorKind::ConfigError, "--struct-mode must be fewshot or zeroshot");

  Gateway gateway = make_gateway(provider);
  const std::vector<AttrSample> samples = load_attr_samples(input);
  AttrBenchOptions options;
  options.augment = augment;
  options.cot = cot;
  options.struct_mode = *struct_mode;
  const BenchReport report = run_attr_bench(samples, gateway, options);
  write_json_file(out, report.to_json());
  print_aggregate_table(report.aggregate);
  std::fprintf(stderr, "unparsed responses: %zu\n", report.unparsed_count);
  print_stats(report.stats);
  return kExitOk;
}

// build-sft / export-humaneval ----------------------------------------------------

int cmd_build_sft(const ProviderOptions& provider, const std::string& records_path,
                  const std::string& out, double min_lexical_recall, double min_semantic_f1,
                  bool no_dedupe, int embed_dim) {
  require_input_file(records_path);
  const std::vector<StructurizeRecord> records = load_records(records_path);
  FilterPolicy policy;
  if (min_lexical_recall >= 0.0) policy.min_lexical_recall = min_lexical_recall;
  if (min_semantic_f1 >= 0.0) policy.min_semantic_f1 = min_semantic_f1;
  policy.dedupe_by_source_hash = !no_dedupe;

  const std::string template_dir = resolve_template_dir(provider);
  const PromptTemplates templates =
      template_dir.empty() ? PromptTemplates::builtin() : PromptTemplates::load(template_dir);
  HashEmbedder embedder(static_cast<size_t>(embed_dim));
  const DatasetStats stats = build_sft_dataset(records, policy, out,
                                               policy.min_semantic_f1 ? &embedder : nullptr,
                                               templates.instruction);
  std::fprintf(stderr,
               "sft dataset: %zu in, %zu kept, %zu failed, %zu below threshold, %zu duplicates\n",
               stats.input_count, stats.kept, stats.dropped_failed, stats.dropped_threshold,
               stats.dropped_dupe);
  return kExitOk;
}

int cmd_export_humaneval(const std::string& records_path, const std::string& out) {
  require_input_file(records_path);
  const std::vector<StructurizeRecord> records = load_records(records_path);
  const HumanEvalExportStats stats = export_human_eval_tasks(records, out);
  std::fprintf(stderr, "exported %zu task(s), excluded %zu failed record(s)\n", stats.exported,
               stats.excluded);
  return kExitOk;
}

// score-run / delta -----------------------------------------------------------------

int cmd_score_run(const std::string& qrels_path, const std::string& run_path,
                  const std::string& out, size_t k) {
  require_input_file(qrels_path);
  require_input_file(run_path);
  const TrecQrels qrels = load_trec_qrels(qrels_path);
  const TrecRun run = load_trec_run(run_path);
  const RunScore score = score_trec_run(run, qrels, k);

  Json report;
  report["k"] = k;
  report["mean_ndcg"] = score.mean;
  report["evaluated_queries"] = score.evaluated_queries;
  report["skipped_queries"] = score.skipped_queries;
  report["per_query"] = score.per_query;
  if (!out.empty()) write_json_file(out, report);
  std::printf("nDCG@%zu  %.4f  (%zu queries, %zu skipped)\n", k, score.mean,
              score.evaluated_queries, score.skipped_queries);
  return kExitOk;
}

int cmd_delta(const std::string& base_path, const std::string& aug_path, const std::string& out) {
  require_input_file(base_path);
  require_input_file(aug_path);
  const BenchReport base = BenchReport::from_json(read_json_file(base_path));
  const BenchReport aug = BenchReport::from_json(read_json_file(aug_path));
  const DeltaReport delta = app_eval_delta(base, aug);
  if (!out.empty()) write_json_file(out, delta.to_json());
  print_aggregate_table(delta.delta);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"strux: context structurization pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ProviderOptions provider;
  std::string input, out, records_path, qrels_path, run_path, base_path, aug_path;
  std::string mode_name = "zeroshot";
  std::string style_name = "nested";
  std::string augmentation_arg = "none";
  std::string struct_mode_name = "zeroshot";
  size_t window = 3500;
  size_t k = 10;
  bool augment = false, cot = false, semantic = false, no_dedupe = false;
  double min_lexical_recall = -1.0, min_semantic_f1 = -1.0;
  int embed_dim = 32;

  CLI::App* structurize = app.add_subcommand("structurize", "Texts -> structurize records JSONL");
  structurize->add_option("--input", input, "Corpus JSONL: {doc_id, text}")->required();
  structurize->add_option("--out", out, "Records JSONL output")->required();
  structurize->add_option("--mode", mode_name, "fewshot|zeroshot (default zeroshot)");
  add_provider_flags(structurize, provider);

  CLI::App* render_cmd = app.add_subcommand("render", "Records -> rendered text JSONL");
  render_cmd->add_option("--records", records_path, "Records JSONL")->required();
  render_cmd->add_option("--out", out, "Output JSONL: {doc_id, text}")->required();
  render_cmd->add_option("--style", style_name, "nested|enumerated|flattened");

  CLI::App* eval_struct = app.add_subcommand("eval-struct", "Lexical/semantic structurization quality");
  eval_struct->add_option("--records", records_path, "Records JSONL")->required();
  eval_struct->add_option("--out", out, "Report JSON output")->required();
  eval_struct->add_flag("--semantic", semantic, "Also score semantic F1 (hash embedder)");
  eval_struct->add_option("--embed-dim", embed_dim, "Hash embedder dimension");

  CLI::App* bench_qa = app.add_subcommand("bench-qa", "Context QA benchmark");
  bench_qa->add_option("--input", input, "QA JSONL: {sample_id, context, question, answers}")
      ->required();
  bench_qa->add_option("--out", out, "Report JSON output")->required();
  bench_qa->add_option("--augmentation", augmentation_arg, "none|structurize|abs|qbs");
  bench_qa->add_option("--window", window, "Context window in tokens");
  bench_qa->add_option("--struct-mode", struct_mode_name, "fewshot|zeroshot");
  add_provider_flags(bench_qa, provider);

  CLI::App* bench_attr = app.add_subcommand("bench-attr", "Attribution judging benchmark");
  bench_attr->add_option("--input", input, "Attr JSONL: {sample_id, claim, reference, label}")
      ->required();
  bench_attr->add_option("--out", out, "Report JSON output")->required();
  bench_attr->add_flag("--augment", augment, "Structurize references before judging");
  bench_attr->add_flag("--cot", cot, "Prepend stepwise verification instructions");
  bench_attr->add_option("--struct-mode", struct_mode_name, "fewshot|zeroshot");
  add_provider_flags(bench_attr, provider);

  CLI::App* flatten = app.add_subcommand("flatten-corpus", "Records -> flattened retrieval corpus");
  flatten->add_option("--records", records_path, "Records JSONL")->required();
  flatten->add_option("--out", out, "Corpus JSONL output")->required();

  CLI::App* build_sft = app.add_subcommand("build-sft", "Records -> SFT dataset JSONL");
  build_sft->add_option("--records", records_path, "Records JSONL")->required();
  build_sft->add_option("--out", out, "SFT JSONL output")->required();
  build_sft->add_option("--min-lexical-recall", min_lexical_recall, "Drop below this recall");
  build_sft->add_option("--min-semantic-f1", min_semantic_f1, "Drop below this semantic F1");
  build_sft->add_flag("--no-dedupe", no_dedupe, "Keep duplicate source hashes");
  build_sft->add_option("--embed-dim", embed_dim, "Hash embedder dimension");
  build_sft->add_option("--template-dir", provider.template_dir,
                        "Template directory for the instruction asset");

  CLI::App* export_he = app.add_subcommand("export-humaneval", "Records -> annotation task JSONL");
  export_he->add_option("--records", records_path, "Records JSONL")->required();
  export_he->add_option("--out", out, "Task JSONL output")->required();

  CLI::App* score_run = app.add_subcommand("score-run", "TREC run + qrels -> nDCG@k");
  score_run->add_option("--qrels", qrels_path, "Qrels file")->required();
  score_run->add_option("--run", run_path, "Run file")->required();
  score_run->add_option("--out", out, "Report JSON output");
  score_run->add_option("--k", k, "Cutoff (default 10)");

  CLI::App* delta = app.add_subcommand("delta", "Two bench reports -> delta report");
  delta->add_option("--base", base_path, "Baseline report JSON")->required();
  delta->add_option("--aug", aug_path, "Augmented report JSON")->required();
  delta->add_option("--out", out, "Delta report JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitInputError;
  }

  try {
    if (structurize->parsed()) return cmd_structurize(provider, input, out, mode_name);
    if (render_cmd->parsed()) return cmd_render(records_path, out, style_name);
    if (eval_struct->parsed()) return cmd_eval_struct(records_path, out, semantic, embed_dim);
    if (bench_qa->parsed())
      return cmd_bench_qa(provider, input, out, augmentation_arg, window, struct_mode_name);
    if (bench_attr->parsed())
      return cmd_bench_attr(provider, input, out, augment, cot, struct_mode_name);
    if (flatten->parsed()) return cmd_flatten_corpus(records_path, out);
    if (build_sft->parsed())
      return cmd_build_sft(provider, records_path, out, min_lexical_recall, min_semantic_f1,
                           no_dedupe, embed_dim);
    if (export_he->parsed()) return cmd_export_humaneval(records_path, out);
    if (score_run->parsed()) return cmd_score_run(qrels_path, run_path, out, k);
    if (delta->parsed()) return cmd_delta(base_path, aug_path, out);
  } catch (const AuthError& e) {
    std::cerr << e.what() << "\n";
    return kExitProviderError;
  } catch (const ProviderError& e) {
    std::cerr << e.what() << "\n";
    return kExitProviderError;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  std::cerr << "no subcommand given\n" << app.help();
  return kExitInputError;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<size_t>(argc));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace strux::cli
