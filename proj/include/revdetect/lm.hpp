#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace revdetect {

struct NGramOptions {
  int order = 3;
  double k = 0.01;  // add-k smoothing constant
  bool include_end_token = true;      // predict </s> after each text
  bool include_unknown_token = true;  // reserve <unk> for unseen words
};

/// Word-level add-k smoothed n-gram model over lowercased whitespace tokens.
/// Each text is one sequence, padded with order-1 start symbols.
class NGramModel {
 public:
  static NGramModel train(std::span<const std::string> texts, const NGramOptions& opts);

  /// P(token | context) where context holds the preceding order-1 token ids.
  double probability(std::span<const int> context, int token) const;

  /// Mean negative log-likelihood (natural log) of the text's tokens.
  double mean_nll(std::string_view text) const;

  std::size_t vocabulary_size() const { return vocab_.size(); }
  int token_id(std::string_view word) const;  // -1 if unknown
  const NGramOptions& options() const { return opts_; }

  static std::vector<std::string> split_tokens(std::string_view text);

 private:
  struct ContextCounts {
    std::unordered_map<int, double> next;
    double total = 0;
  };

  std::string context_key(std::span<const int> context) const;
  std::vector<int> encode(std::string_view text) const;

  NGramOptions opts_;
  std::unordered_map<std::string, int> vocab_;  // predictable tokens
  int end_id_ = -1;
  int unk_id_ = -1;
  static constexpr int kStartId = -2;
  std::unordered_map<std::string, ContextCounts> counts_;
};

/// Per-token natural-log probabilities computed by an external model.
struct TokenLogProbs {
  std::string doc_id;
  std::vector<double> logprobs;
};

/// Reads a CSV with columns doc_id, token_index, logprob. Token indices of
/// each document must cover 0..T-1; every logprob must be <= 0.
std::map<std::string, TokenLogProbs> load_logprobs(const std::filesystem::path& csv_path);

double perplexity(const NGramModel& model, std::string_view text);

/// exp(mean negative log-prob). When expected_tokens is non-zero the number
/// of log-probs must equal it.
double perplexity(const TokenLogProbs& lp, std::size_t expected_tokens = 0);

}  // namespace revdetect
