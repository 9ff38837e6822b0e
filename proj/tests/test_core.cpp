#include <doctest.h>

#include <random>

#include "strux/core.hpp"
#include "testutil.hpp"

using namespace strux;

TEST_CASE("validate accepts a minimal valid tree") {
  StructuredContext ctx{"S", {{"A", {"d"}}}};
  CHECK(validate(ctx).empty());
  CHECK(validate(ctx).ok());
}

TEST_CASE("validate reports empty aspects list") {
  StructuredContext ctx{"S", {}};
  const ValidationReport report = validate(ctx);
  CHECK_FALSE(report.ok());
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].path == "aspects");
}

TEST_CASE("validate reports whitespace-only description with its path") {
  StructuredContext ctx{"S", {{"A", {"  "}}}};
  const ValidationReport report = validate(ctx);
  CHECK_FALSE(report.ok());
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].path == "aspects[0].descriptions[0]");
}

TEST_CASE("validate reports blank scope and title") {
  StructuredContext ctx{" \t ", {{"", {"d"}}}};
  const ValidationReport report = validate(ctx);
  CHECK(report.error_count() == 2);
  CHECK(report.entries[0].path == "scope");
  CHECK(report.entries[1].path == "aspects[0].title");
}

TEST_CASE("duplicate aspect titles are a warning, not an error") {
  StructuredContext ctx{"S", {{"A", {"d1"}}, {"A", {"d2"}}}};
  const ValidationReport report = validate(ctx);
  CHECK(report.ok());
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].severity == Severity::Warning);
  CHECK(report.entries[0].path == "aspects[1].title");
}

TEST_CASE("emptying any required field of a valid tree produces a violation at its path") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    StructuredContext ctx = testutil::random_context(rng);
    REQUIRE(validate(ctx).ok());

    StructuredContext broken = ctx;
    const size_t aspect = std::uniform_int_distribution<size_t>(0, ctx.aspects.size() - 1)(rng);
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
      case 0:
        broken.scope = "   ";
        CHECK(validate(broken).entries.front().path == "scope");
        break;
      case 1:
        broken.aspects[aspect].title = "";
        CHECK(validate(broken).entries.front().path ==
              "aspects[" + std::to_string(aspect) + "].title");
        break;
      default: {
        const size_t desc = std::uniform_int_distribution<size_t>(
            0, ctx.aspects[aspect].descriptions.size() - 1)(rng);
        broken.aspects[aspect].descriptions[desc] = " \n ";
        CHECK(validate(broken).entries.front().path ==
              "aspects[" + std::to_string(aspect) + "].descriptions[" + std::to_string(desc) +
                  "]");
        break;
      }
    }
    CHECK_FALSE(validate(broken).ok());
  }
}

TEST_CASE("record factories enforce the status/context coupling") {
  ProvenanceMeta meta;
  meta.source_hash = source_hash("text");

  const StructurizeRecord ok =
      StructurizeRecord::parsed("text", "{}", {"S", {{"A", {"d"}}}}, meta);
  CHECK(ok.status == ParseStatus::Parsed);
  CHECK(record_is_coherent(ok));

  const StructurizeRecord repaired =
      StructurizeRecord::parsed("text", "{}", {"S", {{"A", {"d"}}}}, meta, {}, true);
  CHECK(repaired.status == ParseStatus::Repaired);
  CHECK(record_is_coherent(repaired));

  const StructurizeRecord failed = StructurizeRecord::failed("text", "nope", meta, {"bad"});
  CHECK(failed.status == ParseStatus::Failed);
  CHECK_FALSE(failed.context.has_value());
  CHECK(record_is_coherent(failed));

  StructurizeRecord broken = failed;
  broken.context = StructuredContext{"S", {{"A", {"d"}}}};
  CHECK_FALSE(record_is_coherent(broken));
}

TEST_CASE("source_hash is deterministic and input-sensitive") {
  CHECK(source_hash("abc") == source_hash("abc"));
  CHECK(source_hash("abc") != source_hash("abd"));
  CHECK(source_hash("abc").size() == 64);
}
