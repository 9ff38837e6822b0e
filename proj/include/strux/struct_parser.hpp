#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strux/core.hpp"

namespace strux {

/// Result of parsing raw model output. Parsed means the raw text was the
/// canonical JSON shape as requested; Repaired means fence stripping, brace
/// extraction, key aliases, or single-string wrapping had to kick in; Failed
/// means no valid tree could be recovered (callers fall back to the original
/// text). Same status/context coupling as StructurizeRecord.
struct ParseOutcome {
  ParseStatus status = ParseStatus::Failed;
  std::optional<StructuredContext> context;
  std::vector<std::string> diagnostics;

  bool ok() const { return status != ParseStatus::Failed; }
};

/// Total and deterministic over arbitrary bytes; never throws. Invalid UTF-8,
/// nesting deeper than 32, and anything that fails core validation come back
/// as Failed outcomes with diagnostics.
ParseOutcome parse_output(std::string_view raw);

/// Strips markdown code fences, then extracts the substring from the first
/// '{' to its balanced matching '}' (string-literal aware). Returns the input
/// unchanged when no balanced object exists.
std::string repair(std::string_view raw);

/// Max object/array nesting accepted before parsing is refused.
inline constexpr int kMaxNestingDepth = 32;

bool is_valid_utf8(std::string_view text);

}  // namespace strux
