#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "strux/error.hpp"
#include "strux/metrics.hpp"
#include "strux/renderer.hpp"
#include "testutil.hpp"

using namespace strux;

TEST_CASE("rouge tokenization: lowercase, punctuation stripped, no stemming") {
  CHECK(normalize_tokens("They adopt ROUGE.", TokenPolicy::Rouge) ==
        TokenSequence{"they", "adopt", "rouge"});
  CHECK(normalize_tokens("ROUGE is adopted", TokenPolicy::Rouge) ==
        TokenSequence{"rouge", "is", "adopted"});
  CHECK(normalize_tokens("", TokenPolicy::Rouge).empty());
  CHECK(normalize_tokens("...", TokenPolicy::Rouge).empty());
}

TEST_CASE("squad tokenization removes articles") {
  CHECK(normalize_tokens("The cat.", TokenPolicy::Squad) == TokenSequence{"cat"});
  CHECK(normalize_tokens("An apple a day", TokenPolicy::Squad) ==
        TokenSequence{"apple", "day"});
}

TEST_CASE("rouge_l reproduces the 0.33 worked example") {
  const PrfScore s = rouge_l("They adopt ROUGE", "ROUGE is adopted");
  CHECK(s.precision == doctest::Approx(1.0 / 3.0));
  CHECK(s.recall == doctest::Approx(1.0 / 3.0));
  CHECK(s.f1 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rouge_l identity and disjoint cases") {
  const PrfScore same = rouge_l("a b c", "a b c");
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  const PrfScore none = rouge_l("a b c", "d e f");
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  const PrfScore empty = rouge_l("", "a b");
  CHECK(empty.f1 == 0.0);
}

TEST_CASE("rouge_l swap: precision and recall exchange, F stays") {
  const PrfScore ab = rouge_l("x y z w", "x q z");
  const PrfScore ba = rouge_l("x q z", "x y z w");
  CHECK(ab.precision == doctest::Approx(ba.recall));
  CHECK(ab.recall == doctest::Approx(ba.precision));
  CHECK(ab.f1 == doctest::Approx(ba.f1));
}

TEST_CASE("LCS matches the brute-force oracle exhaustively on short sequences") {
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  // All pairs with both sides of length <= 4.
  std::vector<TokenSequence> sequences = {{}};
  std::vector<TokenSequence> frontier = {{}};
  for (int len = 1; len <= 4; ++len) {
    std::vector<TokenSequence> next;
    for (const TokenSequence& seq : frontier) {
      for (const std::string& symbol : alphabet) {
        TokenSequence extended = seq;
        extended.push_back(symbol);
        next.push_back(extended);
        sequences.push_back(std::move(extended));
      }
    }
    frontier = std::move(next);
  }
  for (const TokenSequence& a : sequences)
    for (const TokenSequence& b : sequences)
      REQUIRE(lcs_length(a, b) == testutil::oracle_lcs(a, b));
}

TEST_CASE("LCS matches the oracle on sampled longer sequences") {
  std::mt19937_64 rng(99);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    auto sample = [&](size_t max_len) {
      TokenSequence seq;
      const size_t len = std::uniform_int_distribution<size_t>(0, max_len)(rng);
      for (size_t i = 0; i < len; ++i)
        seq.push_back(alphabet[std::uniform_int_distribution<size_t>(0, 3)(rng)]);
      return seq;
    };
    const TokenSequence a = sample(12);
    const TokenSequence b = sample(12);
    REQUIRE(lcs_length(a, b) == testutil::oracle_lcs(a, b));
  }
}

TEST_CASE("scores stay in [0,1] under random fuzzing") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string a = testutil::random_phrase(rng, 0, 20);
    const std::string b = testutil::random_phrase(rng, 0, 20);
    const PrfScore s = rouge_l(a, b);
    CHECK(s.precision >= 0.0);
    CHECK(s.precision <= 1.0);
    CHECK(s.recall >= 0.0);
    CHECK(s.recall <= 1.0);
    CHECK(s.f1 >= 0.0);
    CHECK(s.f1 <= 1.0);
    const double f = qa_f1(a, {b});
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("appending reference tokens never pushes recall above 1") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 100; ++trial) {
    std::string reference = testutil::random_phrase(rng, 1, 10);
    const std::string candidate = reference;
    double last_recall = rouge_l(candidate, reference).recall;
    CHECK(last_recall == doctest::Approx(1.0));
    for (int step = 0; step < 5; ++step) {
      reference += " " + testutil::random_word(rng);
      const double recall = rouge_l(candidate, reference).recall;
      CHECK(recall <= last_recall + 1e-12);
      CHECK(recall <= 1.0);
      last_recall = recall;
    }
  }
}

TEST_CASE("lexical_eval is rouge_l of the flattened render") {
  const StructuredContext ctx{"S", {{"A", {"alpha beta gamma"}}}};
  const std::string original = "S. A: alpha beta gamma";
  const PrfScore direct = rouge_l(render(ctx, RenderStyle::Flattened), original);
  const PrfScore via = lexical_eval(ctx, original);
  CHECK(via.precision == direct.precision);
  CHECK(via.recall == direct.recall);
  CHECK(via.f1 == direct.f1);
  CHECK(via.f1 == doctest::Approx(1.0));
}

TEST_CASE("lexical_eval: structure covering half the original has recall 0.5, precision 1") {
  // Original has 12 tokens; the structure's flattened render reproduces the
  // first 6 exactly and adds nothing else.
  const std::string original = "one two three four five six seven eight nine ten eleven twelve";
  const StructuredContext ctx{"one", {{"two", {"three four five six"}}}};
  const PrfScore s = lexical_eval(ctx, original);

  // Independent check through the brute-force LCS oracle.
  const TokenSequence cand = normalize_tokens(render(ctx, RenderStyle::Flattened),
                                              TokenPolicy::Rouge);
  const TokenSequence ref = normalize_tokens(original, TokenPolicy::Rouge);
  const size_t oracle = testutil::oracle_lcs(cand, ref);
  CHECK(oracle == 6);
  CHECK(s.recall == doctest::Approx(6.0 / 12.0));
  CHECK(s.precision == doctest::Approx(1.0));
}

TEST_CASE("qa_f1 worked examples") {
  CHECK(qa_f1("Paris", {"Paris"}) == doctest::Approx(1.0));
  CHECK(qa_f1("x b", {"b c"}) == doctest::Approx(0.5));  // P=R=1/2
  CHECK(qa_f1("x", {"y", "x z"}) == doctest::Approx(2.0 / 3.0));
  CHECK(qa_f1("nothing", {"else"}) == 0.0);
  CHECK(qa_f1("the", {"a"}) == doctest::Approx(1.0));  // both normalize to empty
  CHECK(qa_f1("the", {"word"}) == 0.0);
  // Articles vanish before the overlap is computed.
  CHECK(qa_f1("a b", {"b c"}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("greedy semantic F1 on orthonormal fixtures") {
  const std::vector<double> e1 = {1, 0, 0};
  const std::vector<double> e2 = {0, 1, 0};
  const std::vector<double> e3 = {0, 0, 1};

  const PrfScore self = greedy_semantic_f1({e1, e2}, {e1, e2});
  CHECK(self.precision == 1.0);
  CHECK(self.recall == 1.0);
  CHECK(self.f1 == 1.0);

  const PrfScore orth = greedy_semantic_f1({e1}, {e2});
  CHECK(orth.precision == 0.0);
  CHECK(orth.recall == 0.0);
  CHECK(orth.f1 == 0.0);

  const PrfScore half = greedy_semantic_f1({e1}, {e1, e2});
  CHECK(half.recall == doctest::Approx(0.5));
  CHECK(half.precision == doctest::Approx(1.0));
  CHECK(half.f1 == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(greedy_semantic_f1({e1}, {{1, 0}}), Error);
  CHECK_THROWS_AS(greedy_semantic_f1({}, {e3}), Error);
}

TEST_CASE("greedy semantic F1 is permutation-invariant") {
  std::mt19937_64 rng(777);
  const HashEmbedder embedder(16);
  const Embedding cand = embedder.embed("alpha beta gamma delta epsilon");
  const Embedding ref = embedder.embed("gamma epsilon zeta alpha");
  const PrfScore base = greedy_semantic_f1(cand.vectors, ref.vectors);
  for (int shuffle = 0; shuffle < 100; ++shuffle) {
    auto c = cand.vectors;
    auto r = ref.vectors;
    std::shuffle(c.begin(), c.end(), rng);
    std::shuffle(r.begin(), r.end(), rng);
    const PrfScore shuffled = greedy_semantic_f1(c, r);
    CHECK(shuffled.precision == base.precision);
    CHECK(shuffled.recall == base.recall);
    CHECK(shuffled.f1 == base.f1);
  }
}

TEST_CASE("hash embedder is deterministic and unit-norm") {
  const HashEmbedder embedder(32);
  const Embedding a = embedder.embed("token soup");
  const Embedding b = embedder.embed("token soup");
  REQUIRE(a.vectors.size() == 2);
  CHECK(a.vectors == b.vectors);
  for (const auto& v : a.vectors) {
    double norm = 0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  }
  const PrfScore self = greedy_semantic_f1(a.vectors, b.vectors);
  CHECK(self.f1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ndcg worked examples") {
  CHECK(ndcg_at_k({1, 0, 0}, 3) == doctest::Approx(1.0));
  CHECK(ndcg_at_k({0, 0}, 5) == 0.0);
  CHECK(ndcg_at_k({0, 1}, 2) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-9));
  CHECK(ndcg_at_k({}, 10) == 0.0);
}

TEST_CASE("ndcg of any descending ordering with a positive entry is 1") {
  std::mt19937_64 rng(888);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> rels;
    const size_t n = std::uniform_int_distribution<size_t>(1, 20)(rng);
    for (size_t i = 0; i < n; ++i)
      rels.push_back(std::uniform_int_distribution<int>(0, 3)(rng));
    std::sort(rels.begin(), rels.end(), std::greater<>());
    const size_t k = std::uniform_int_distribution<size_t>(1, 25)(rng);
    const bool any_positive_in_k = std::any_of(rels.begin(), rels.end(),
                                               [](double r) { return r > 0; });
    if (any_positive_in_k)
      CHECK(ndcg_at_k(rels, k) == doctest::Approx(1.0));
    else
      CHECK(ndcg_at_k(rels, k) == 0.0);
  }
}

TEST_CASE("per-class accuracy counts and macro average") {
  const ClassAccuracy identity =
      per_class_accuracy({"A", "B"}, {"A", "B"}, {"A", "B"});
  CHECK(*identity.per_label.at("A") == 1.0);
  CHECK(*identity.per_label.at("B") == 1.0);
  CHECK(identity.macro == 1.0);

  const ClassAccuracy mixed =
      per_class_accuracy({"A", "B", "B"}, {"A", "A", "B"}, {"A", "B"});
  CHECK(*mixed.per_label.at("A") == doctest::Approx(0.5));
  CHECK(*mixed.per_label.at("B") == doctest::Approx(1.0));
  CHECK(mixed.macro == doctest::Approx(0.75));

  const ClassAccuracy sparse = per_class_accuracy({"A"}, {"A"}, {"A", "B"});
  CHECK_FALSE(sparse.per_label.at("B").has_value());
  CHECK(sparse.macro == doctest::Approx(1.0));
}

TEST_CASE("per-class accuracy error paths") {
  CHECK_THROWS_AS(per_class_accuracy({"A"}, {"A", "B"}, {"A", "B"}), Error);
  try {
    per_class_accuracy({"A"}, {"C"}, {"A", "B"});
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
  }
  // Predictions outside the label set simply score as incorrect.
  const ClassAccuracy unparsed = per_class_accuracy({"Unparsed"}, {"A"}, {"A", "B"});
  CHECK(*unparsed.per_label.at("A") == 0.0);
}

TEST_CASE("semantic_eval returns zeros when a side has no tokens") {
  const HashEmbedder embedder(16);
  const StructuredContext ctx{"S", {{"A", {"d"}}}};
  const PrfScore empty_ref = semantic_eval(ctx, "...", embedder);
  CHECK(empty_ref.f1 == 0.0);
  const PrfScore full = semantic_eval(ctx, "S. A: d", embedder);
  CHECK(full.f1 == doctest::Approx(1.0).epsilon(1e-12));
}
