#pragma once

#include <atomic>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "strux/core.hpp"

namespace strux {

using Json = nlohmann::ordered_json;

/// Canonical JSON object shape for a StructuredContext.
Json context_to_json(const StructuredContext& ctx);
StructuredContext context_from_json(const Json& node);  // throws Error(InvalidContext)

Json record_to_json(const StructurizeRecord& rec);
/// Throws Error(InvalidContext) when the status/context coupling is broken.
StructurizeRecord record_from_json(const Json& node);

/// Whole-file JSONL read; blank lines are skipped, malformed lines throw
/// Error(IoError) naming the line number.
std::vector<Json> read_jsonl(const std::string& path);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& value);

/// Set by SIGINT handling in the CLI binary; batch loops poll it.
std::atomic<bool>& interrupt_flag();

/// Single-writer JSONL emitter: writes to a temp file, renamed into place by
/// finalize(). write_truncation_marker records an interrupted run.
class JsonlWriter {
 public:
  explicit JsonlWriter(std::string path);
  ~JsonlWriter();

  JsonlWriter(const JsonlWriter&) = delete;
  JsonlWriter& operator=(const JsonlWriter&) = delete;

  void write(const Json& line);
  void write_truncation_marker();
  void finalize();
  size_t lines_written() const { return lines_; }

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  size_t lines_ = 0;
  bool finalized_ = false;
};

}  // namespace strux
