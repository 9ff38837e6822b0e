#include "strux/struct_parser.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

namespace strux {

namespace {

using nlohmann::json;

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_scope_key(const std::string& lowered) {
  return lowered == "scope" || lowered == "statement's scope";
}
bool is_aspects_key(const std::string& lowered) { return lowered == "aspects"; }
bool is_name_key(const std::string& lowered) {
  return lowered == "name" || lowered == "aspectname" || lowered == "aspect" ||
         lowered == "title";
}
bool is_descriptions_key(const std::string& lowered) {
  return lowered == "descriptions" || lowered == "details";
}

// Max brace/bracket depth outside string literals; -1 on unterminated string.
int scan_nesting_depth(std::string_view text) {
  int depth = 0;
  int max_depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '{':
      case '[':
        ++depth;
        max_depth = std::max(max_depth, depth);
        break;
      case '}':
      case ']':
        --depth;
        break;
      default: break;
    }
  }
  return max_depth;
}

// Removes ``` fence markers together with an attached language tag, keeping
// the fenced content in place.
std::string strip_fences(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 3, "```") == 0) {
      i += 3;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
              text[i] == '+' || text[i] == '-'))
        ++i;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

// Substring from the first '{' to its balanced '}' honoring string literals
// and the nesting cap. Empty optional when absent.
std::optional<std::string> extract_balanced_object(std::string_view text) {
  size_t start = text.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
      if (depth > kMaxNestingDepth) return std::nullopt;
    } else if (c == '}' || c == ']') {
      --depth;
      if (depth == 0 && c == '}') return std::string(text.substr(start, i - start + 1));
    }
  }
  return std::nullopt;
}

struct Extraction {
  std::optional<StructuredContext> context;
  std::vector<std::string> diagnostics;
  bool used_alias = false;
  bool wrapped_description = false;
  bool ignored_keys = false;
};

std::optional<std::string> coerce_to_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number() || value.is_boolean()) return value.dump();
  return std::nullopt;
}

// Tolerant extraction: alias keys, case-insensitive matching, single-string
// descriptions wrapped into one-element lists, unknown keys ignored.
Extraction extract_tree(const json& root) {
  Extraction ex;
  if (!root.is_object()) {
    ex.diagnostics.push_back("top-level JSON value is not an object");
    return ex;
  }

  const json* scope_value = nullptr;
  const json* aspects_value = nullptr;
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string lowered = lower_ascii(it.key());
    if (is_scope_key(lowered) && !scope_value) {
      if (it.key() != "scope") {
        ex.used_alias = true;
        ex.diagnostics.push_back("alias key '" + it.key() + "' mapped to scope");
      }
      scope_value = &it.value();
    } else if (is_aspects_key(lowered) && !aspects_value) {
      if (it.key() != "aspects") {
        ex.used_alias = true;
        ex.diagnostics.push_back("alias key '" + it.key() + "' mapped to aspects");
      }
      aspects_value = &it.value();
    } else {
      ex.ignored_keys = true;
      ex.diagnostics.push_back("ignored unknown key '" + it.key() + "'");
    }
  }
  if (!scope_value) {
    ex.diagnostics.push_back("no scope key found");
    return ex;
  }
  if (!aspects_value) {
    ex.diagnostics.push_back("no aspects key found");
    return ex;
  }

  StructuredContext ctx;
  if (auto text = coerce_to_text(*scope_value)) {
    ctx.scope = *text;
  } else {
    ex.diagnostics.push_back("scope value is not a string");
    return ex;
  }
  if (!aspects_value->is_array()) {
    ex.diagnostics.push_back("aspects value is not an array");
    return ex;
  }

  for (size_t i = 0; i < aspects_value->size(); ++i) {
    const json& node = (*aspects_value)[i];
    const std::string base = "aspects[" + std::to_string(i) + "]";
    if (!node.is_object()) {
      ex.diagnostics.push_back(base + " is not an object");
      ex.context.reset();
      return ex;
    }
    const json* name_value = nullptr;
    const json* desc_value = nullptr;
    for (auto it = node.begin(); it != node.end(); ++it) {
      const std::string lowered = lower_ascii(it.key());
      if (is_name_key(lowered) && !name_value) {
        if (it.key() != "name") {
          ex.used_alias = true;
          ex.diagnostics.push_back("alias key '" + it.key() + "' mapped to " + base + ".name");
        }
        name_value = &it.value();
      } else if (is_descriptions_key(lowered) && !desc_value) {
        if (it.key() != "descriptions") {
          ex.used_alias = true;
          ex.diagnostics.push_back("alias key '" + it.key() + "' mapped to " + base +
                                   ".descriptions");
        }
        desc_value = &it.value();
      } else {
        ex.ignored_keys = true;
        ex.diagnostics.push_back("ignored unknown key '" + it.key() + "' in " + base);
      }
    }
    if (!name_value || !desc_value) {
      ex.diagnostics.push_back(base + " lacks a name or descriptions key");
      return ex;
    }

    Aspect aspect;
    if (auto text = coerce_to_text(*name_value)) {
      aspect.title = *text;
    } else {
      ex.diagnostics.push_back(base + ".name is not a string");
      return ex;
    }
    if (desc_value->is_array()) {
      for (size_t j = 0; j < desc_value->size(); ++j) {
        auto text = coerce_to_text((*desc_value)[j]);
        if (!text) {
          ex.diagnostics.push_back(base + ".descriptions[" + std::to_string(j) +
                                   "] is not a string");
          return ex;
        }
        aspect.descriptions.push_back(std::move(*text));
      }
    } else if (auto text = coerce_to_text(*desc_value)) {
      ex.wrapped_description = true;
      ex.diagnostics.push_back("wrapped single-string descriptions at " + base);
      aspect.descriptions.push_back(std::move(*text));
    } else {
      ex.diagnostics.push_back(base + ".descriptions is neither an array nor a string");
      return ex;
    }
    ctx.aspects.push_back(std::move(aspect));
  }

  ex.context = std::move(ctx);
  return ex;
}

// Exact canonical shape: lowercase keys, no extras, descriptions as string
// arrays. This is the strict tier recovered output must satisfy.
bool matches_canonical_schema(const json& root) {
  if (!root.is_object() || root.size() != 2) return false;
  if (!root.contains("scope") || !root.contains("aspects")) return false;
  if (!root["scope"].is_string() || !root["aspects"].is_array()) return false;
  for (const json& node : root["aspects"]) {
    if (!node.is_object() || node.size() != 2) return false;
    if (!node.contains("name") || !node.contains("descriptions")) return false;
    if (!node["name"].is_string() || !node["descriptions"].is_array()) return false;
    for (const json& d : node["descriptions"])
      if (!d.is_string()) return false;
  }
  return true;
}

StructuredContext tree_from_canonical(const json& root) {
  StructuredContext ctx;
  ctx.scope = root["scope"].get<std::string>();
  for (const json& node : root["aspects"]) {
    Aspect aspect;
    aspect.title = node["name"].get<std::string>();
    for (const json& d : node["descriptions"]) aspect.descriptions.push_back(d.get<std::string>());
    ctx.aspects.push_back(std::move(aspect));
  }
  return ctx;
}

void append_validation_diagnostics(const ValidationReport& report,
                                   std::vector<std::string>& diagnostics) {
  for (const auto& v : report.entries)
    if (v.severity == Severity::Error)
      diagnostics.push_back("invalid tree: " + v.path + " " + v.message);
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      if (c < 0xC2) return false;  // overlong
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      if (c > 0xF4) return false;  // beyond U+10FFFF
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (size_t j = 1; j < len; ++j)
      if ((static_cast<unsigned char>(text[i + j]) & 0xC0) != 0x80) return false;
    if (len == 3) {
      const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
      if (c == 0xE0 && c1 < 0xA0) return false;               // overlong
      if (c == 0xED && c1 >= 0xA0) return false;              // surrogate
    } else if (len == 4) {
      const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
      if (c == 0xF0 && c1 < 0x90) return false;               // overlong
      if (c == 0xF4 && c1 >= 0x90) return false;              // beyond U+10FFFF
    }
    i += len;
  }
  return true;
}

std::string repair(std::string_view raw) {
  const std::string defenced = strip_fences(raw);
  if (auto object = extract_balanced_object(defenced)) return *object;
  return std::string(raw);
}

ParseOutcome parse_output(std::string_view raw) {
  ParseOutcome outcome;

  if (!is_valid_utf8(raw)) {
    outcome.diagnostics.push_back("input is not valid UTF-8");
    return outcome;
  }
  if (scan_nesting_depth(raw) > kMaxNestingDepth) {
    outcome.diagnostics.push_back("nesting depth exceeds cap of " +
                                  std::to_string(kMaxNestingDepth));
    return outcome;
  }

  // Strict tier: the raw text is itself the canonical JSON object.
  json direct = json::parse(raw, nullptr, false);
  if (!direct.is_discarded() && matches_canonical_schema(direct)) {
    StructuredContext ctx = tree_from_canonical(direct);
    ValidationReport report = validate(ctx);
    if (report.ok()) {
      outcome.status = ParseStatus::Parsed;
      outcome.context = std::move(ctx);
      return outcome;
    }
    append_validation_diagnostics(report, outcome.diagnostics);
    return outcome;
  }

  // Repair tier: fence stripping / brace extraction, then tolerant keys.
  bool repaired_text = false;
  json root = direct;
  if (root.is_discarded()) {
    const std::string fixed = repair(raw);
    repaired_text = fixed != raw;
    root = json::parse(fixed, nullptr, false);
    if (root.is_discarded()) {
      outcome.diagnostics.push_back(raw.find('{') == std::string_view::npos
                                        ? "no JSON object found in output"
                                        : "no parsable JSON object found in output");
      return outcome;
    }
    if (repaired_text) outcome.diagnostics.push_back("extracted JSON object from surrounding text");
  }

  Extraction ex = extract_tree(root);
  outcome.diagnostics.insert(outcome.diagnostics.end(), ex.diagnostics.begin(),
                             ex.diagnostics.end());
  if (!ex.context) return outcome;

  ValidationReport report = validate(*ex.context);
  if (!report.ok()) {
    append_validation_diagnostics(report, outcome.diagnostics);
    return outcome;
  }

  outcome.status = ParseStatus::Repaired;
  outcome.context = std::move(ex.context);
  return outcome;
}

}  // namespace strux
