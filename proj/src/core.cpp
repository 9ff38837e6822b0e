#include "strux/core.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <stdexcept>
#include <unordered_map>

#include "strux/digest.hpp"
#include "strux/error.hpp"

namespace strux {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MissingQuery: return "MissingQuery";
    case ErrorKind::UnexpectedQuery: return "UnexpectedQuery";
    case ErrorKind::InvalidContext: return "InvalidContext";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptySide: return "EmptySide";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::SampleSetMismatch: return "SampleSetMismatch";
    case ErrorKind::MissingEmbedder: return "MissingEmbedder";
    case ErrorKind::ProviderError: return "ProviderError";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

bool is_blank(std::string_view text) { return trim_view(text).empty(); }

std::string_view trim_view(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

ValidationReport validate(const StructuredContext& ctx) {
  ValidationReport report;
  if (is_blank(ctx.scope))
    report.entries.push_back({"scope", "empty after trim", Severity::Error});
  if (ctx.aspects.empty())
    report.entries.push_back({"aspects", "empty", Severity::Error});

  std::unordered_map<std::string, size_t> seen_titles;
  for (size_t i = 0; i < ctx.aspects.size(); ++i) {
    const Aspect& aspect = ctx.aspects[i];
    const std::string base = "aspects[" + std::to_string(i) + "]";
    if (is_blank(aspect.title)) {
      report.entries.push_back({base + ".title", "empty after trim", Severity::Error});
    } else {
      auto [it, inserted] = seen_titles.emplace(std::string(trim_view(aspect.title)), i);
      if (!inserted)
        report.entries.push_back({base + ".title",
                                  "duplicate of aspects[" + std::to_string(it->second) + "].title",
                                  Severity::Warning});
    }
    if (aspect.descriptions.empty())
      report.entries.push_back({base + ".descriptions", "empty", Severity::Error});
    for (size_t j = 0; j < aspect.descriptions.size(); ++j) {
      if (is_blank(aspect.descriptions[j]))
        report.entries.push_back({base + ".descriptions[" + std::to_string(j) + "]",
                                  "empty after trim", Severity::Error});
    }
  }
  return report;
}

const char* parse_status_name(ParseStatus status) {
  switch (status) {
    case ParseStatus::Parsed: return "parsed";
    case ParseStatus::Repaired: return "repaired";
    case ParseStatus::Failed: return "failed";
  }
  return "failed";
}

std::optional<ParseStatus> parse_status_from_name(std::string_view name) {
  if (name == "parsed") return ParseStatus::Parsed;
  if (name == "repaired") return ParseStatus::Repaired;
  if (name == "failed") return ParseStatus::Failed;
  return std::nullopt;
}

const char* prompt_mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::FewShot: return "fewshot";
    case PromptMode::ZeroShot: return "zeroshot";
    case PromptMode::AbsBaseline: return "abs";
    case PromptMode::QbsBaseline: return "qbs";
  }
  return "zeroshot";
}

std::optional<PromptMode> prompt_mode_from_name(std::string_view name) {
  if (name == "fewshot") return PromptMode::FewShot;
  if (name == "zeroshot") return PromptMode::ZeroShot;
  if (name == "abs") return PromptMode::AbsBaseline;
  if (name == "qbs") return PromptMode::QbsBaseline;
  return std::nullopt;
}

StructurizeRecord StructurizeRecord::parsed(std::string input, std::string raw,
                                            StructuredContext ctx, ProvenanceMeta meta,
                                            std::vector<std::string> diagnostics, bool repaired) {
  if (!validate(ctx).ok())
    throw std::logic_error("StructurizeRecord::parsed called with invalid context");
  StructurizeRecord rec;
  rec.input_text = std::move(input);
  rec.raw_output = std::move(raw);
  rec.status = repaired ? ParseStatus::Repaired : ParseStatus::Parsed;
  rec.context = std::move(ctx);
  rec.diagnostics = std::move(diagnostics);
  rec.meta = std::move(meta);
  return rec;
}

StructurizeRecord StructurizeRecord::failed(std::string input, std::string raw,
                                            ProvenanceMeta meta,
                                            std::vector<std::string> diagnostics) {
  StructurizeRecord rec;
  rec.input_text = std::move(input);
  rec.raw_output = std::move(raw);
  rec.status = ParseStatus::Failed;
  rec.context = std::nullopt;
  rec.diagnostics = std::move(diagnostics);
  rec.meta = std::move(meta);
  return rec;
}

bool record_is_coherent(const StructurizeRecord& rec) {
  if (rec.status == ParseStatus::Failed) return !rec.context.has_value();
  return rec.context.has_value() && validate(*rec.context).ok();
}

std::string source_hash(std::string_view input_text) { return sha256_hex(input_text); }

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace strux
