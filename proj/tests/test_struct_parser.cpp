#include <doctest.h>

#include <random>

#include "strux/renderer.hpp"
#include "strux/struct_parser.hpp"
#include "testutil.hpp"

using namespace strux;

namespace {

bool diagnostics_mention(const ParseOutcome& outcome, const std::string& needle) {
  for (const std::string& d : outcome.diagnostics)
    if (d.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("canonical JSON parses with status Parsed") {
  const ParseOutcome outcome =
      parse_output(R"({"scope":"S","aspects":[{"name":"A","descriptions":["d"]}]})");
  REQUIRE(outcome.status == ParseStatus::Parsed);
  REQUIRE(outcome.context.has_value());
  CHECK(outcome.context->scope == "S");
  REQUIRE(outcome.context->aspects.size() == 1);
  CHECK(outcome.context->aspects[0].title == "A");
  CHECK(outcome.context->aspects[0].descriptions == std::vector<std::string>{"d"});
}

TEST_CASE("fenced alias-keyed output is Repaired with the right tree") {
  const ParseOutcome outcome = parse_output(
      "Here is the result:\n```json\n"
      R"({"Scope":"S","Aspects":[{"AspectName":"A","Descriptions":["d1","d2"]}]})"
      "\n``` Hope this helps!");
  REQUIRE(outcome.status == ParseStatus::Repaired);
  CHECK(outcome.context->scope == "S");
  REQUIRE(outcome.context->aspects.size() == 1);
  CHECK(outcome.context->aspects[0].title == "A");
  CHECK(outcome.context->aspects[0].descriptions == std::vector<std::string>{"d1", "d2"});
}

TEST_CASE("prose output fails with a no-JSON-object diagnostic") {
  const ParseOutcome outcome = parse_output("I cannot structurize this.");
  CHECK(outcome.status == ParseStatus::Failed);
  CHECK_FALSE(outcome.context.has_value());
  CHECK(diagnostics_mention(outcome, "no JSON object"));
}

TEST_CASE("every alias in the table maps to its canonical key") {
  for (const char* scope_key : {"scope", "Scope", "SCOPE", "Statement's Scope"}) {
    for (const char* name_key : {"name", "AspectName", "aspect", "title", "Title"}) {
      for (const char* desc_key : {"descriptions", "Descriptions", "details", "Details"}) {
        std::string raw = std::string("{\"") + scope_key + "\":\"S\",\"aspects\":[{\"" +
                          name_key + "\":\"A\",\"" + desc_key + "\":[\"d\"]}]}";
        const ParseOutcome outcome = parse_output(raw);
        REQUIRE(outcome.ok());
        CHECK(outcome.context->scope == "S");
        CHECK(outcome.context->aspects[0].title == "A");
      }
    }
  }
}

TEST_CASE("only the exact canonical shape earns status Parsed") {
  CHECK(parse_output(R"({"scope":"S","aspects":[{"name":"A","descriptions":["d"]}]})").status ==
        ParseStatus::Parsed);
  // Alias keys, extra keys, or wrapping demote to Repaired.
  CHECK(parse_output(R"({"Scope":"S","aspects":[{"name":"A","descriptions":["d"]}]})").status ==
        ParseStatus::Repaired);
  CHECK(parse_output(
            R"({"scope":"S","aspects":[{"name":"A","descriptions":["d"]}],"extra":1})")
            .status == ParseStatus::Repaired);
  CHECK(parse_output(R"({"scope":"S","aspects":[{"name":"A","descriptions":"d"}]})").status ==
        ParseStatus::Repaired);
}

TEST_CASE("single-string descriptions are wrapped with a diagnostic") {
  const ParseOutcome outcome =
      parse_output(R"({"scope":"S","aspects":[{"name":"A","descriptions":"only one"}]})");
  REQUIRE(outcome.status == ParseStatus::Repaired);
  CHECK(outcome.context->aspects[0].descriptions == std::vector<std::string>{"only one"});
  CHECK(diagnostics_mention(outcome, "wrapped single-string"));
}

TEST_CASE("unknown extra keys are ignored with a diagnostic") {
  const ParseOutcome outcome = parse_output(
      R"({"scope":"S","note":"x","aspects":[{"name":"A","descriptions":["d"],"idx":3}]})");
  REQUIRE(outcome.ok());
  CHECK(diagnostics_mention(outcome, "ignored unknown key 'note'"));
  CHECK(diagnostics_mention(outcome, "ignored unknown key 'idx'"));
}

TEST_CASE("aspects with zero descriptions are a parse failure") {
  const ParseOutcome outcome =
      parse_output(R"({"scope":"S","aspects":[{"name":"A","descriptions":[]}]})");
  CHECK(outcome.status == ParseStatus::Failed);
  CHECK(diagnostics_mention(outcome, "descriptions"));
}

TEST_CASE("repair strips fences") {
  CHECK(repair("```json\n{\"a\":1}\n```") == "{\"a\":1}");
}

TEST_CASE("repair honors string literals while brace matching") {
  CHECK(repair(R"(prefix {"a":"}"} suffix)") == R"({"a":"}"})");
}

TEST_CASE("repair returns input unchanged when no balanced object exists") {
  CHECK(repair("no braces here") == "no braces here");
  CHECK(repair("open { but never closed") == "open { but never closed");
}

TEST_CASE("nesting beyond the cap fails instead of crashing") {
  std::string deep = R"({"scope":"S","aspects":)";
  for (int i = 0; i < 50; ++i) deep += "[";
  for (int i = 0; i < 50; ++i) deep += "]";
  deep += "}";
  const ParseOutcome outcome = parse_output(deep);
  CHECK(outcome.status == ParseStatus::Failed);
  CHECK(diagnostics_mention(outcome, "nesting depth"));
}

TEST_CASE("invalid UTF-8 is a Failed outcome, not a crash") {
  std::string bad = R"({"scope":")";
  bad += static_cast<char>(0xFF);
  bad += static_cast<char>(0xFE);
  bad += R"(","aspects":[{"name":"A","descriptions":["d"]}]})";
  const ParseOutcome outcome = parse_output(bad);
  CHECK(outcome.status == ParseStatus::Failed);
  CHECK(diagnostics_mention(outcome, "UTF-8"));
}

TEST_CASE("multi-megabyte adversarial input terminates quickly") {
  std::string big = "prefix ";
  big.reserve(10'500'000);
  for (int i = 0; i < 10'000'000 / 10; ++i) big += "abc {def} ";
  const ParseOutcome outcome = parse_output(big);
  CHECK(outcome.status == ParseStatus::Failed);
}

TEST_CASE("round trip: canonical_json then parse_output is the identity, 200 random trees") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 200; ++i) {
    const StructuredContext ctx = testutil::random_context(rng);
    const ParseOutcome outcome = parse_output(canonical_json(ctx));
    REQUIRE(outcome.status == ParseStatus::Parsed);
    CHECK(*outcome.context == ctx);
  }
}

TEST_CASE("parse_output never yields a context violating core invariants") {
  std::mt19937_64 rng(202);
  const std::vector<std::string> fragments = {
      R"({"scope":"", "aspects":[{"name":"A","descriptions":["d"]}]})",
      R"({"scope":"S","aspects":[]})",
      R"({"scope":"S","aspects":[{"name":" ","descriptions":["d"]}]})",
      R"({"scope":"S","aspects":[{"name":"A","descriptions":[" "]}]})",
      R"(text {"scope":"S","aspects":[{"name":"A","descriptions":["d"]}]} tail)",
      "{} nothing", "[1,2,3]", "", "{{{{", R"({"scope":42,"aspects":[]})"};
  for (const std::string& raw : fragments) {
    const ParseOutcome outcome = parse_output(raw);
    if (outcome.context) CHECK(validate(*outcome.context).ok());
    CHECK((outcome.ok() == outcome.context.has_value()));
  }
  for (int i = 0; i < 200; ++i) {
    std::string noise;
    const size_t len = std::uniform_int_distribution<size_t>(0, 120)(rng);
    static const std::string chars = R"({}[]":,abc \n0)";
    for (size_t j = 0; j < len; ++j)
      noise += chars[std::uniform_int_distribution<size_t>(0, chars.size() - 1)(rng)];
    const ParseOutcome outcome = parse_output(noise);
    if (outcome.context) CHECK(validate(*outcome.context).ok());
    CHECK((outcome.ok() == outcome.context.has_value()));
  }
}
