#pragma once

#include <optional>
#include <string>
#include <vector>

namespace strux {

/// One facet of a structurized statement: a title plus the detailed
/// description sentences that support it.
struct Aspect {
  std::string title;
  std::vector<std::string> descriptions;

  bool operator==(const Aspect&) const = default;
};

/// The three-layer knowledge structure: a scope sentence on top, an ordered
/// list of aspects below it, each carrying ordered descriptions.
struct StructuredContext {
  std::string scope;
  std::vector<Aspect> aspects;

  bool operator==(const StructuredContext&) const = default;
};

enum class Severity { Error, Warning };

struct Violation {
  std::string path;  // e.g. "aspects[2].descriptions[0]"
  std::string message;
  Severity severity = Severity::Error;
};

struct ValidationReport {
  std::vector<Violation> entries;

  bool ok() const {
    for (const auto& v : entries)
      if (v.severity == Severity::Error) return false;
    return true;
  }
  bool empty() const { return entries.empty(); }
  size_t error_count() const {
    size_t n = 0;
    for (const auto& v : entries) n += v.severity == Severity::Error;
    return n;
  }
};

/// Checks every structural invariant of a StructuredContext. Violations are
/// data, not failures: an empty report means the tree is valid. Duplicate
/// aspect titles come back as warnings and do not make the tree invalid.
ValidationReport validate(const StructuredContext& ctx);

/// Whitespace-only strings count as empty everywhere in the pipeline.
bool is_blank(std::string_view text);
std::string_view trim_view(std::string_view text);

enum class ParseStatus { Parsed, Repaired, Failed };

const char* parse_status_name(ParseStatus status);
std::optional<ParseStatus> parse_status_from_name(std::string_view name);

enum class PromptMode { FewShot, ZeroShot, AbsBaseline, QbsBaseline };

const char* prompt_mode_name(PromptMode mode);
std::optional<PromptMode> prompt_mode_from_name(std::string_view name);

struct ProvenanceMeta {
  std::string source_id;
  std::string source_hash;  // sha256 of the input text bytes
  std::string model_id;
  PromptMode prompt_mode = PromptMode::ZeroShot;
  double decode_temperature = 0.0;
  std::string created_at;  // ISO-8601 UTC, excluded from determinism checks
};

/// One unit of pipeline work: the input passage, the raw model output, and
/// the parse result. status Parsed/Repaired iff context is present and valid;
/// Failed iff context is absent — enforced by the factories below and
/// re-asserted at every file boundary.
struct StructurizeRecord {
  std::string input_text;
  std::string raw_output;
  ParseStatus status = ParseStatus::Failed;
  std::optional<StructuredContext> context;
  std::vector<std::string> diagnostics;
  ProvenanceMeta meta;

  bool ok() const { return status != ParseStatus::Failed; }

  static StructurizeRecord parsed(std::string input, std::string raw, StructuredContext ctx,
                                  ProvenanceMeta meta, std::vector<std::string> diagnostics = {},
                                  bool repaired = false);
  static StructurizeRecord failed(std::string input, std::string raw, ProvenanceMeta meta,
                                  std::vector<std::string> diagnostics);
};

/// Status/context coupling holds; used as the boundary assertion.
bool record_is_coherent(const StructurizeRecord& rec);

std::string source_hash(std::string_view input_text);
std::string iso8601_now();

}  // namespace strux
