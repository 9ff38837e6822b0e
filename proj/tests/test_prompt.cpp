#include <doctest.h>

#include <random>

#include "strux/error.hpp"
#include "strux/prompt.hpp"
#include "testutil.hpp"

using namespace strux;

TEST_CASE("zero-shot prompt carries the instruction, no exemplars, and the text verbatim") {
  const PromptBundle bundle = build_structurize_prompt("some passage", PromptMode::ZeroShot);
  REQUIRE(bundle.messages.size() == 1);
  CHECK(bundle.messages[0].role == Role::User);
  const std::string& content = bundle.messages[0].content;
  CHECK(content.find(PromptTemplates::builtin().instruction) != std::string::npos);
  CHECK(count_occurrences(content, kExemplarMarker) == 0);
  CHECK(count_occurrences(content, "some passage") == 1);
}

TEST_CASE("few-shot prompt carries exactly two exemplar blocks") {
  const PromptBundle bundle = build_structurize_prompt("some passage", PromptMode::FewShot);
  const std::string& content = bundle.messages[0].content;
  CHECK(count_occurrences(content, kExemplarMarker) == 2);
  CHECK(count_occurrences(content, "some passage") == 1);
}

TEST_CASE("few-shot minus zero-shot length equals the exemplar block length, for any input") {
  const PromptTemplates& t = PromptTemplates::builtin();
  const size_t block_length = t.example_1.size() + 2 + t.example_2.size() + 2;

  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const std::string text = testutil::random_phrase(rng, 3, 40);
    const size_t few = build_structurize_prompt(text, PromptMode::FewShot).char_length();
    const size_t zero = build_structurize_prompt(text, PromptMode::ZeroShot).char_length();
    CHECK(few - zero == block_length);
  }
}

TEST_CASE("prompt building is deterministic") {
  const PromptBundle a = build_structurize_prompt("text body", PromptMode::FewShot);
  const PromptBundle b = build_structurize_prompt("text body", PromptMode::FewShot);
  CHECK(a == b);
  CHECK(a.flatten() == b.flatten());
}

TEST_CASE("structurize prompt rejects empty input") {
  CHECK_THROWS_AS(build_structurize_prompt("", PromptMode::ZeroShot), Error);
  CHECK_THROWS_AS(build_structurize_prompt(" \n\t ", PromptMode::FewShot), Error);
  try {
    build_structurize_prompt("  ", PromptMode::ZeroShot);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
}

TEST_CASE("ABS baseline renders the exact template") {
  const PromptBundle bundle = build_baseline_prompt("T", PromptMode::AbsBaseline);
  CHECK(bundle.messages[0].content ==
        "Summarize the following text with no more than three sentences. Passage: T; Summary: ");
}

TEST_CASE("QBS baseline renders the exact template") {
  const PromptBundle bundle = build_baseline_prompt("T", PromptMode::QbsBaseline, "Q");
  CHECK(bundle.messages[0].content ==
        "Summarize the following text to answer the query with no more than three sentences. "
        "Query: Q; Passage: T; Summary:");
}

TEST_CASE("QBS without a query and ABS with one are rejected") {
  try {
    build_baseline_prompt("T", PromptMode::QbsBaseline);
    FAIL("expected MissingQuery");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingQuery);
  }
  try {
    build_baseline_prompt("T", PromptMode::AbsBaseline, std::optional<std::string>("Q"));
    FAIL("expected UnexpectedQuery");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnexpectedQuery);
  }
}

TEST_CASE("input text appears verbatim exactly once in every prompt form") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const std::string text = "zq" + testutil::random_word(rng, 12, 20) + "qz";
    for (PromptMode mode : {PromptMode::FewShot, PromptMode::ZeroShot})
      CHECK(count_occurrences(build_structurize_prompt(text, mode).messages[0].content, text) ==
            1);
    CHECK(count_occurrences(
              build_baseline_prompt(text, PromptMode::AbsBaseline).messages[0].content, text) ==
          1);
    CHECK(count_occurrences(
              build_baseline_prompt(text, PromptMode::QbsBaseline, "query").messages[0].content,
              text) == 1);
  }
}

TEST_CASE("template directory assets match the builtin set") {
  const PromptTemplates loaded = PromptTemplates::load(STRUX_TEMPLATE_DIR);
  CHECK(loaded == PromptTemplates::builtin());
}

TEST_CASE("loading a missing template directory fails with IoError") {
  try {
    PromptTemplates::load("/nonexistent/dir");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}
