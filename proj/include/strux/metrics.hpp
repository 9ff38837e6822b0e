#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strux/core.hpp"

namespace strux {

/// Precision/recall/F1 triple shared by ROUGE-L, token F1 and semantic F1.
/// f1 = 2PR/(P+R) when P+R > 0, else 0.
struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PrfScore from_pr(double precision, double recall);
};

enum class TokenPolicy {
  Rouge,  // lowercase, strip punctuation, whitespace split, no stemming
  Squad,  // Rouge plus removal of the articles a/an/the
};

using TokenSequence = std::vector<std::string>;

TokenSequence normalize_tokens(std::string_view text, TokenPolicy policy);

/// Longest common subsequence length between two token sequences.
size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

/// ROUGE-L between candidate and reference texts under the Rouge policy.
/// Empty token sequence on either side scores all zeros.
PrfScore rouge_l(std::string_view candidate, std::string_view reference);
PrfScore rouge_l_tokens(const TokenSequence& candidate, const TokenSequence& reference);

/// Structurization coverage/faithfulness: ROUGE-L of the flattened render
/// against the original text. Recall measures coverage of the original,
/// precision measures faithfulness of the structure.
PrfScore lexical_eval(const StructuredContext& ctx, std::string_view original);

/// SQuAD-style token F1, max over gold answers. Both-empty pairs score 1.
double qa_f1(std::string_view prediction, const std::vector<std::string>& gold_answers);

/// BERTScore-style greedy matching over unit vectors: recall averages each
/// reference token's best cosine match in the candidate, precision the
/// symmetric direction. No idf weighting, no baseline rescaling.
PrfScore greedy_semantic_f1(const std::vector<std::vector<double>>& cand_embeddings,
                            const std::vector<std::vector<double>>& ref_embeddings);

/// DCG with gain 2^rel - 1 and log2(i+1) discount over the first k entries.
double dcg_at_k(const std::vector<double>& relevances, size_t k);

/// nDCG with the ideal ordering taken from the input list itself; 0 when the
/// ideal DCG is 0.
double ndcg_at_k(const std::vector<double>& ranked_relevances, size_t k);

struct ClassAccuracy {
  /// Per label: accuracy among samples whose gold is that label; absent when
  /// the label has zero gold samples.
  std::map<std::string, std::optional<double>> per_label;
  /// Unweighted mean over labels with at least one gold sample.
  double macro = 0.0;
};

ClassAccuracy per_class_accuracy(const std::vector<std::string>& predictions,
                                 const std::vector<std::string>& golds,
                                 const std::vector<std::string>& labels);

struct Embedding {
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> vectors;  // unit vectors, one per token
};

/// Maps UTF-8 text to one unit vector per token. Implementations must be
/// safe for concurrent calls.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual size_t dimension() const = 0;
};

/// Deterministic test embedder: each distinct token hashes to a fixed unit
/// vector, so equal texts embed identically on every platform.
class HashEmbedder : public TokenEmbedder {
 public:
  explicit HashEmbedder(size_t dimension = 32) : dimension_(dimension) {}
  Embedding embed(std::string_view text) const override;
  size_t dimension() const override { return dimension_; }

 private:
  size_t dimension_;
};

/// Semantic similarity between the structure's flattened render and the
/// original text. Returns zeros when either side has no tokens.
PrfScore semantic_eval(const StructuredContext& ctx, std::string_view original,
                       const TokenEmbedder& embedder);

}  // namespace strux
