#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "strux/core.hpp"

namespace strux {

/// The three natural-language shapes a structure can be rendered into.
/// NestedNumbered keeps descriptions attached to their aspect line (QA
/// contexts), Enumerated breaks every description out on its own numbered
/// line (judge contexts), Flattened drops all markers (retrieval corpora).
enum class RenderStyle { NestedNumbered, Enumerated, Flattened };

const char* render_style_name(RenderStyle style);
std::optional<RenderStyle> render_style_from_name(std::string_view name);

/// Deterministic rendering; every scope/title/description string appears
/// verbatim and in order. Throws Error(InvalidContext) when validate fails.
std::string render(const StructuredContext& ctx, RenderStyle style);

/// Compact canonical JSON: {"scope":...,"aspects":[{"name":...,"descriptions":[...]}]}.
/// parse_output of the result always yields status Parsed with an equal tree.
std::string canonical_json(const StructuredContext& ctx);

}  // namespace strux
