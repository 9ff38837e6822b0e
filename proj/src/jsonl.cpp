#include "strux/jsonl.hpp"

#include <filesystem>
#include <random>
#include <sstream>

#include "strux/error.hpp"

namespace strux {

Json context_to_json(const StructuredContext& ctx) {
  Json root;
  root["scope"] = ctx.scope;
  Json aspects = Json::array();
  for (const Aspect& aspect : ctx.aspects) {
    Json a;
    a["name"] = aspect.title;
    a["descriptions"] = aspect.descriptions;
    aspects.push_back(std::move(a));
  }
  root["aspects"] = std::move(aspects);
  return root;
}

StructuredContext context_from_json(const Json& node) {
  if (!node.is_object() || !node.contains("scope") || !node.contains("aspects"))
    throw Error(ErrorKind::InvalidContext, "context JSON lacks scope/aspects");
  StructuredContext ctx;
  ctx.scope = node["scope"].get<std::string>();
  for (const Json& a : node["aspects"]) {
    Aspect aspect;
    aspect.title = a.at("name").get<std::string>();
    for (const Json& d : a.at("descriptions")) aspect.descriptions.push_back(d.get<std::string>());
    ctx.aspects.push_back(std::move(aspect));
  }
  ValidationReport report = validate(ctx);
  if (!report.ok()) {
    std::string detail = "context JSON violates invariants:";
    for (const auto& v : report.entries)
      if (v.severity == Severity::Error) detail += " " + v.path + " " + v.message + ";";
    throw Error(ErrorKind::InvalidContext, detail);
  }
  return ctx;
}

Json record_to_json(const StructurizeRecord& rec) {
  if (!record_is_coherent(rec))
    throw Error(ErrorKind::InvalidContext, "record breaks the status/context coupling");
  Json node;
  node["input_text"] = rec.input_text;
  node["raw_output"] = rec.raw_output;
  node["status"] = parse_status_name(rec.status);
  node["context"] = rec.context ? context_to_json(*rec.context) : Json(nullptr);
  node["diagnostics"] = rec.diagnostics;
  Json meta;
  meta["source_id"] = rec.meta.source_id;
  meta["source_hash"] = rec.meta.source_hash;
  meta["model_id"] = rec.meta.model_id;
  meta["prompt_mode"] = prompt_mode_name(rec.meta.prompt_mode);
  meta["decode_temperature"] = rec.meta.decode_temperature;
  meta["created_at"] = rec.meta.created_at;
  node["meta"] = std::move(meta);
  return node;
}

StructurizeRecord record_from_json(const Json& node) {
  StructurizeRecord rec;
  rec.input_text = node.at("input_text").get<std::string>();
  rec.raw_output = node.value("raw_output", "");
  const std::string status = node.at("status").get<std::string>();
  auto parsed_status = parse_status_from_name(status);
  if (!parsed_status)
    throw Error(ErrorKind::InvalidContext, "unknown record status '" + status + "'");
  rec.status = *parsed_status;
  if (node.contains("context") && !node["context"].is_null())
    rec.context = context_from_json(node["context"]);
  if (node.contains("diagnostics"))
    for (const Json& d : node["diagnostics"]) rec.diagnostics.push_back(d.get<std::string>());
  if (node.contains("meta")) {
    const Json& meta = node["meta"];
    rec.meta.source_id = meta.value("source_id", "");
    rec.meta.source_hash = meta.value("source_hash", "");
    rec.meta.model_id = meta.value("model_id", "");
    if (auto mode = prompt_mode_from_name(meta.value("prompt_mode", "zeroshot")))
      rec.meta.prompt_mode = *mode;
    rec.meta.decode_temperature = meta.value("decode_temperature", 0.0);
    rec.meta.created_at = meta.value("created_at", "");
  }
  if (!record_is_coherent(rec))
    throw Error(ErrorKind::InvalidContext, "record breaks the status/context coupling");
  return rec;
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::vector<Json> lines;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    Json value = Json::parse(line, nullptr, false);
    if (value.is_discarded())
      throw Error(ErrorKind::IoError,
                  path + ":" + std::to_string(line_number) + ": malformed JSON line");
    lines.push_back(std::move(value));
  }
  return lines;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  Json value = Json::parse(in, nullptr, false);
  if (value.is_discarded()) throw Error(ErrorKind::IoError, "malformed JSON file " + path);
  return value;
}

void write_json_file(const std::string& path, const Json& value) {
  namespace fs = std::filesystem;
  if (fs::path(path).has_parent_path()) {
    std::error_code ec;
    fs::create_directories(fs::path(path).parent_path(), ec);
  }
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const std::string tmp = path + ".tmp" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << value.dump(2) << '\n';
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot finalize " + path);
  }
}

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

JsonlWriter::JsonlWriter(std::string path) : path_(std::move(path)) {
  namespace fs = std::filesystem;
  if (fs::path(path_).has_parent_path()) {
    std::error_code ec;
    fs::create_directories(fs::path(path_).parent_path(), ec);
  }
  thread_local std::mt19937_64 rng{std::random_device{}()};
  tmp_path_ = path_ + ".tmp" + std::to_string(rng());
  out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorKind::IoError, "cannot write " + path_);
}

JsonlWriter::~JsonlWriter() {
  if (!finalized_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_path_, ec);
  }
}

void JsonlWriter::write(const Json& line) {
  out_ << line.dump() << '\n';
  ++lines_;
}

void JsonlWriter::write_truncation_marker() {
  Json marker;
  marker["truncated"] = true;
  marker["lines_before_truncation"] = lines_;
  write(marker);
}

void JsonlWriter::finalize() {
  if (finalized_) return;
  out_.flush();
  out_.close();
  if (!out_)
    throw Error(ErrorKind::IoError, "write failure on " + tmp_path_);
  std::error_code ec;
  std::filesystem::rename(tmp_path_, path_, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot finalize " + path_);
  finalized_ = true;
}

}  // namespace strux
