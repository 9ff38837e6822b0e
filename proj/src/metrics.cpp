#include "strux/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "strux/error.hpp"
#include "strux/renderer.hpp"

namespace strux {

namespace {

bool is_article(const std::string& token) {
  return token == "a" || token == "an" || token == "the";
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double unit_interval(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Best cosine match per row vector, sorted before averaging so the mean is
// exactly permutation-invariant.
double mean_best_similarity(const std::vector<std::vector<double>>& rows,
                            const std::vector<std::vector<double>>& columns) {
  std::vector<double> best;
  best.reserve(rows.size());
  for (const auto& row : rows) {
    double max_sim = -1.0;
    for (const auto& col : columns) {
      double dot = 0.0;
      for (size_t i = 0; i < row.size(); ++i) dot += row[i] * col[i];
      max_sim = std::max(max_sim, dot);
    }
    best.push_back(clamp01(max_sim));
  }
  std::sort(best.begin(), best.end());
  double sum = 0.0;
  for (double v : best) sum += v;
  return best.empty() ? 0.0 : sum / static_cast<double>(best.size());
}

}  // namespace

PrfScore PrfScore::from_pr(double precision, double recall) {
  PrfScore s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return s;
}

TokenSequence normalize_tokens(std::string_view text, TokenPolicy policy) {
  TokenSequence tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (policy != TokenPolicy::Squad || !is_article(current)) tokens.push_back(current);
    current.clear();
  };
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      // ASCII punctuation is deleted in place, matching SQuAD normalization.
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : raw);
    }
  }
  flush();
  return tokens;
}

size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<uint32_t> prev(b.size() + 1, 0);
  std::vector<uint32_t> curr(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        curr[j] = prev[j - 1] + 1;
      else
        curr[j] = std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

PrfScore rouge_l_tokens(const TokenSequence& candidate, const TokenSequence& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  return PrfScore::from_pr(lcs / static_cast<double>(candidate.size()),
                           lcs / static_cast<double>(reference.size()));
}

PrfScore rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l_tokens(normalize_tokens(candidate, TokenPolicy::Rouge),
                        normalize_tokens(reference, TokenPolicy::Rouge));
}

PrfScore lexical_eval(const StructuredContext& ctx, std::string_view original) {
  return rouge_l(render(ctx, RenderStyle::Flattened), original);
}

double qa_f1(std::string_view prediction, const std::vector<std::string>& gold_answers) {
  const TokenSequence pred = normalize_tokens(prediction, TokenPolicy::Squad);
  double best = 0.0;
  for (const std::string& gold_answer : gold_answers) {
    const TokenSequence gold = normalize_tokens(gold_answer, TokenPolicy::Squad);
    if (pred.empty() && gold.empty()) {
      best = std::max(best, 1.0);
      continue;
    }
    if (pred.empty() || gold.empty()) continue;
    std::unordered_map<std::string, size_t> gold_counts;
    for (const std::string& t : gold) ++gold_counts[t];
    size_t overlap = 0;
    for (const std::string& t : pred) {
      auto it = gold_counts.find(t);
      if (it != gold_counts.end() && it->second > 0) {
        --it->second;
        ++overlap;
      }
    }
    if (overlap == 0) continue;
    const double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(gold.size());
    best = std::max(best, PrfScore::from_pr(p, r).f1);
  }
  return best;
}

PrfScore greedy_semantic_f1(const std::vector<std::vector<double>>& cand_embeddings,
                            const std::vector<std::vector<double>>& ref_embeddings) {
  if (cand_embeddings.empty() || ref_embeddings.empty())
    throw Error(ErrorKind::EmptySide, "both embedding lists must be non-empty");
  const size_t dim = cand_embeddings.front().size();
  for (const auto& v : cand_embeddings)
    if (v.size() != dim)
      throw Error(ErrorKind::DimensionMismatch, "candidate vectors differ in dimension");
  for (const auto& v : ref_embeddings)
    if (v.size() != dim)
      throw Error(ErrorKind::DimensionMismatch, "reference vectors differ in dimension");

  const double recall = mean_best_similarity(ref_embeddings, cand_embeddings);
  const double precision = mean_best_similarity(cand_embeddings, ref_embeddings);
  return PrfScore::from_pr(precision, recall);
}

double dcg_at_k(const std::vector<double>& relevances, size_t k) {
  double dcg = 0.0;
  const size_t n = std::min(k, relevances.size());
  for (size_t i = 0; i < n; ++i)
    dcg += (std::exp2(relevances[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  return dcg;
}

double ndcg_at_k(const std::vector<double>& ranked_relevances, size_t k) {
  std::vector<double> ideal = ranked_relevances;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg <= 0.0) return 0.0;
  return dcg_at_k(ranked_relevances, k) / idcg;
}

ClassAccuracy per_class_accuracy(const std::vector<std::string>& predictions,
                                 const std::vector<std::string>& golds,
                                 const std::vector<std::string>& labels) {
  if (predictions.size() != golds.size())
    throw Error(ErrorKind::LengthMismatch, "predictions and golds differ in length");

  std::map<std::string, std::pair<size_t, size_t>> counts;  // label -> {correct, total}
  for (const std::string& label : labels) counts[label] = {0, 0};
  for (size_t i = 0; i < golds.size(); ++i) {
    auto it = counts.find(golds[i]);
    if (it == counts.end())
      throw Error(ErrorKind::UnknownLabel, "gold label '" + golds[i] + "' not in label set");
    ++it->second.second;
    if (predictions[i] == golds[i]) ++it->second.first;
  }

  ClassAccuracy result;
  double sum = 0.0;
  size_t defined = 0;
  for (const std::string& label : labels) {
    const auto& [correct, total] = counts[label];
    if (total == 0) {
      result.per_label[label] = std::nullopt;
    } else {
      const double acc = static_cast<double>(correct) / static_cast<double>(total);
      result.per_label[label] = acc;
      sum += acc;
      ++defined;
    }
  }
  result.macro = defined ? sum / static_cast<double>(defined) : 0.0;
  return result;
}

Embedding HashEmbedder::embed(std::string_view text) const {
  Embedding out;
  out.tokens = normalize_tokens(text, TokenPolicy::Rouge);
  out.vectors.reserve(out.tokens.size());
  for (const std::string& token : out.tokens) {
    uint64_t state = fnv1a64(token);
    std::vector<double> v(dimension_);
    double norm_sq = 0.0;
    for (double& x : v) {
      x = unit_interval(splitmix64(state)) * 2.0 - 1.0;
      norm_sq += x * x;
    }
    if (norm_sq < 1e-24) {
      v.assign(dimension_, 0.0);
      v[0] = 1.0;
    } else {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& x : v) x *= inv;
    }
    out.vectors.push_back(std::move(v));
  }
  return out;
}

PrfScore semantic_eval(const StructuredContext& ctx, std::string_view original,
                       const TokenEmbedder& embedder) {
  const Embedding cand = embedder.embed(render(ctx, RenderStyle::Flattened));
  const Embedding ref = embedder.embed(original);
  if (cand.vectors.empty() || ref.vectors.empty()) return {};
  return greedy_semantic_f1(cand.vectors, ref.vectors);
}

}  // namespace strux
