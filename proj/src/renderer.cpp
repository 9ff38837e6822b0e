#include "strux/renderer.hpp"

#include <nlohmann/json.hpp>

#include "strux/error.hpp"

namespace strux {

namespace {

void require_valid(const StructuredContext& ctx) {
  ValidationReport report = validate(ctx);
  if (report.ok()) return;
  std::string detail;
  for (const auto& v : report.entries) {
    if (v.severity != Severity::Error) continue;
    if (!detail.empty()) detail += "; ";
    detail += v.path + ": " + v.message;
  }
  throw Error(ErrorKind::InvalidContext, detail);
}

std::string join_spaces(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ' ';
    out += parts[i];
  }
  return out;
}

}  // namespace

const char* render_style_name(RenderStyle style) {
  switch (style) {
    case RenderStyle::NestedNumbered: return "nested";
    case RenderStyle::Enumerated: return "enumerated";
    case RenderStyle::Flattened: return "flattened";
  }
  return "nested";
}

std::optional<RenderStyle> render_style_from_name(std::string_view name) {
  if (name == "nested") return RenderStyle::NestedNumbered;
  if (name == "enumerated") return RenderStyle::Enumerated;
  if (name == "flattened") return RenderStyle::Flattened;
  return std::nullopt;
}

std::string render(const StructuredContext& ctx, RenderStyle style) {
  require_valid(ctx);

  if (style == RenderStyle::Flattened) {
    std::string out = ctx.scope + ". ";
    for (const Aspect& aspect : ctx.aspects)
      out += aspect.title + ": " + join_spaces(aspect.descriptions) + " ";
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
  }

  std::string out = "**Statement's scope: " + ctx.scope + "**\n";
  out += "It covers the following aspects:";
  for (size_t i = 0; i < ctx.aspects.size(); ++i) {
    const Aspect& aspect = ctx.aspects[i];
    const std::string number = std::to_string(i + 1);
    if (style == RenderStyle::NestedNumbered) {
      out += "\n**" + number + ". " + aspect.title + ":** " + join_spaces(aspect.descriptions);
    } else {
      out += "\n**" + number + ". " + aspect.title + ":**";
      for (size_t j = 0; j < aspect.descriptions.size(); ++j)
        out += "\n" + number + "." + std::to_string(j + 1) + " " + aspect.descriptions[j];
    }
  }
  return out;
}

std::string canonical_json(const StructuredContext& ctx) {
  require_valid(ctx);
  nlohmann::ordered_json root;
  root["scope"] = ctx.scope;
  nlohmann::ordered_json aspects = nlohmann::ordered_json::array();
  for (const Aspect& aspect : ctx.aspects) {
    nlohmann::ordered_json a;
    a["name"] = aspect.title;
    a["descriptions"] = aspect.descriptions;
    aspects.push_back(std::move(a));
  }
  root["aspects"] = std::move(aspects);
  return root.dump();
}

}  // namespace strux
