#include "strux/prompt.hpp"

#include <fstream>
#include <sstream>

#include "strux/error.hpp"

namespace strux {

namespace {

const char* kInstruction =
    R"(You are an expert in analyzing and reorganizing text. Deconstruct the input statement into a three-layer knowledge structure:

1. Scope: summarize the topic and boundary of the statement, outlining the central issue and the range of the discussion it covers.
2. Aspect: subdivide the statement into the aspects or dimensions that must be considered to cover its scope.
3. Description: collect, for each aspect, the detailed statements and analyses from the text that support it. Keep the original wording wherever possible and never invent content that is not in the statement.

Return the result as a single JSON object of exactly this shape:
{"scope": "...", "aspects": [{"name": "...", "descriptions": ["...", "..."]}]}

Every aspect must hold at least one description. Output the JSON object only, with no commentary before or after it.)";

const char* kExample1 =
    R"(### Example 1

The statement below already carries numerical indicators. Follow the existing indicators when building the aspect-description structure.

Input statement:
Urban gardening programs succeed for three reasons. 1. Access: community plots give residents without yards a place to grow food, and waiting lists in most cities clear within a year. 2. Education: weekly workshops teach composting, watering schedules, and natural pest control. 3. Cohesion: shared harvests bring neighbours together, and organizers report measurably less social isolation around active plots.

Structurized result:
{"scope": "Why urban gardening programs succeed", "aspects": [{"name": "Access", "descriptions": ["Community plots give residents without yards a place to grow food.", "Waiting lists in most cities clear within a year."]}, {"name": "Education", "descriptions": ["Weekly workshops teach composting, watering schedules, and natural pest control."]}, {"name": "Cohesion", "descriptions": ["Shared harvests bring neighbours together.", "Organizers report measurably less social isolation around active plots."]}]})";

const char* kExample2 =
    R"(### Example 2

The statement below has no explicit indicators. Summarize the aspects yourself and attach the corresponding descriptions from the raw text.

Input statement:
The harbour town's economy once rested on cod fishing, and generations of families crewed the boats that left before dawn. When stocks collapsed, the canneries closed within a decade and the fleet shrank to a handful of vessels. Tourism slowly replaced the old trade: restored warehouses now hold galleries and seafood restaurants, and summer ferries bring day visitors from the capital.

Structurized result:
{"scope": "The economic history of the harbour town", "aspects": [{"name": "The cod fishing era", "descriptions": ["The town's economy once rested on cod fishing.", "Generations of families crewed the boats that left before dawn."]}, {"name": "The collapse of the fishery", "descriptions": ["When stocks collapsed, the canneries closed within a decade.", "The fleet shrank to a handful of vessels."]}, {"name": "The shift to tourism", "descriptions": ["Restored warehouses now hold galleries and seafood restaurants.", "Summer ferries bring day visitors from the capital."]}]})";

std::string rstrip(std::string text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  return text;
}

std::string read_template_file(const std::string& dir, const std::string& name) {
  const std::string path = dir + "/" + name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read template file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return rstrip(buf.str());
}

std::string payload_section(std::string_view text) {
  std::string out = "Now structurize the following input statement as required.\n\n";
  out += "Input statement:\n";
  out += text;
  out += "\n\nStructurized result:\n";
  return out;
}

}  // namespace

size_t PromptBundle::char_length() const {
  size_t n = 0;
  for (const Message& m : messages) n += m.content.size();
  return n;
}

std::string PromptBundle::flatten() const {
  std::string out;
  for (const Message& m : messages) {
    out += m.role == Role::System ? "system\n" : "user\n";
    out += m.content;
    out += '\n';
  }
  return out;
}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates templates{kInstruction, kExample1, kExample2};
  return templates;
}

PromptTemplates PromptTemplates::load(const std::string& dir) {
  PromptTemplates t;
  t.instruction = read_template_file(dir, "structurize_instruction.txt");
  t.example_1 = read_template_file(dir, "structurize_example_1.txt");
  t.example_2 = read_template_file(dir, "structurize_example_2.txt");
  return t;
}

PromptBundle build_structurize_prompt(std::string_view text, PromptMode mode,
                                      const PromptTemplates& templates) {
  if (mode != PromptMode::FewShot && mode != PromptMode::ZeroShot)
    throw Error(ErrorKind::ConfigError, "structurize prompt requires FewShot or ZeroShot mode");
  if (is_blank(text)) throw Error(ErrorKind::EmptyInput, "input text is empty");

  std::string content = templates.instruction;
  content += "\n\n";
  if (mode == PromptMode::FewShot) {
    content += templates.example_1;
    content += "\n\n";
    content += templates.example_2;
    content += "\n\n";
  }
  content += payload_section(text);

  return PromptBundle{{Message{Role::User, std::move(content)}}};
}

PromptBundle build_baseline_prompt(std::string_view text, PromptMode mode,
                                   const std::optional<std::string>& query) {
  if (mode != PromptMode::AbsBaseline && mode != PromptMode::QbsBaseline)
    throw Error(ErrorKind::ConfigError, "baseline prompt requires AbsBaseline or QbsBaseline mode");
  if (is_blank(text)) throw Error(ErrorKind::EmptyInput, "input text is empty");

  std::string content;
  if (mode == PromptMode::AbsBaseline) {
    if (query.has_value())
      throw Error(ErrorKind::UnexpectedQuery, "ABS baseline does not take a query");
    content = "Summarize the following text with no more than three sentences. Passage: ";
    content += text;
    content += "; Summary: ";
  } else {
    if (!query.has_value() || is_blank(*query))
      throw Error(ErrorKind::MissingQuery, "QBS baseline requires a non-empty query");
    content = "Summarize the following text to answer the query with no more than three sentences. Query: ";
    content += *query;
    content += "; Passage: ";
    content += text;
    content += "; Summary:";
  }
  return PromptBundle{{Message{Role::User, std::move(content)}}};
}

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  size_t count = 0;
  size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace strux
