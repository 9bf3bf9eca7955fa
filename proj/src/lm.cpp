#include "revdetect/lm.hpp"

#include <charconv>
#include <cmath>

#include "revdetect/csv.hpp"
#include "revdetect/error.hpp"
#include "revdetect/text_util.hpp"
#include "revdetect/textfeat.hpp"

namespace revdetect {

std::vector<std::string> NGramModel::split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t s = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > s) out.push_back(to_lower_ascii(text.substr(s, i - s)));
  }
  return out;
}

NGramModel NGramModel::train(std::span<const std::string> texts, const NGramOptions& opts) {
  if (opts.order < 1 || opts.order > 5) throw Error("n-gram order must be in [1,5]");
  if (!(opts.k >= 0.0) || !std::isfinite(opts.k)) throw Error("smoothing constant must be >= 0");

  NGramModel m;
  m.opts_ = opts;
  std::vector<std::vector<std::string>> tokenized;
  std::size_t total_tokens = 0;
  for (auto& t : texts) {
    tokenized.push_back(split_tokens(t));
    total_tokens += tokenized.back().size();
    for (auto& w : tokenized.back()) m.vocab_.try_emplace(w, static_cast<int>(m.vocab_.size()));
  }
  if (total_tokens == 0) throw Error("n-gram training corpus is empty");
  if (opts.include_end_token) {
    m.end_id_ = static_cast<int>(m.vocab_.size());
    m.vocab_.emplace("</s>", m.end_id_);
  }
  if (opts.include_unknown_token) {
    m.unk_id_ = static_cast<int>(m.vocab_.size());
    m.vocab_.emplace("<unk>", m.unk_id_);
  }

  const int ctx_len = opts.order - 1;
  for (auto& toks : tokenized) {
    if (toks.empty()) continue;
    std::vector<int> seq(ctx_len, kStartId);
    for (auto& w : toks) seq.push_back(m.vocab_.at(w));
    if (opts.include_end_token) seq.push_back(m.end_id_);
    for (std::size_t i = ctx_len; i < seq.size(); ++i) {
      auto& c = m.counts_[m.context_key({seq.data() + i - ctx_len, static_cast<std::size_t>(ctx_len)})];
      c.next[seq[i]] += 1.0;
      c.total += 1.0;
    }
  }
  return m;
}

std::string NGramModel::context_key(std::span<const int> context) const {
  std::string key;
  key.reserve(context.size() * 4);
  for (int id : context) key.append(reinterpret_cast<const char*>(&id), sizeof id);
  return key;
}

int NGramModel::token_id(std::string_view word) const {
  auto it = vocab_.find(std::string(word));
  return it == vocab_.end() ? -1 : it->second;
}

double NGramModel::probability(std::span<const int> context, int token) const {
  const double v = static_cast<double>(vocab_.size());
  double count = 0, total = 0;
  auto it = counts_.find(context_key(context));
  if (it != counts_.end()) {
    total = it->second.total;
    auto jt = it->second.next.find(token);
    if (jt != it->second.next.end()) count = jt->second;
  }
  double denom = total + opts_.k * v;
  if (denom <= 0) return 0.0;  // unseen context with k = 0
  return (count + opts_.k) / denom;
}

std::vector<int> NGramModel::encode(std::string_view text) const {
  std::vector<int> ids;
  for (auto& w : split_tokens(text)) {
    int id = token_id(w);
    if (id < 0 || w == "</s>" || w == "<unk>") {
      if (unk_id_ < 0) throw Error("token '" + w + "' is not in the n-gram vocabulary");
      id = unk_id_;
    }
    ids.push_back(id);
  }
  return ids;
}

double NGramModel::mean_nll(std::string_view text) const {
  auto ids = encode(text);
  if (ids.empty()) throw Error("perplexity: text has no tokens");
  const int ctx_len = opts_.order - 1;
  std::vector<int> seq(ctx_len, kStartId);
  seq.insert(seq.end(), ids.begin(), ids.end());
  if (opts_.include_end_token) seq.push_back(end_id_);

  double nll = 0;
  std::size_t n = 0;
  for (std::size_t i = ctx_len; i < seq.size(); ++i, ++n) {
    double p = probability({seq.data() + i - ctx_len, static_cast<std::size_t>(ctx_len)}, seq[i]);
    if (p <= 0) throw Error("perplexity: zero-probability event (k = 0 and unseen n-gram)");
    nll -= std::log(p);
  }
  return nll / static_cast<double>(n);
}

double perplexity(const NGramModel& model, std::string_view text) {
  return std::exp(model.mean_nll(text));
}

double perplexity(const TokenLogProbs& lp, std::size_t expected_tokens) {
  if (lp.logprobs.empty()) throw Error("perplexity: no log-probabilities for " + lp.doc_id);
  if (expected_tokens != 0 && expected_tokens != lp.logprobs.size())
    throw Error("perplexity: " + lp.doc_id + " has " + std::to_string(lp.logprobs.size()) +
                " log-probs, expected " + std::to_string(expected_tokens));
  double sum = 0;
  for (double v : lp.logprobs) {
    if (v > 0 || std::isnan(v)) throw Error("perplexity: log-probability > 0 in " + lp.doc_id);
    sum -= v;
  }
  return std::exp(sum / static_cast<double>(lp.logprobs.size()));
}

std::map<std::string, TokenLogProbs> load_logprobs(const std::filesystem::path& csv_path) {
  auto t = csv::read_file(csv_path.string());
  int c_doc = t.column("doc_id"), c_idx = t.column("token_index"), c_lp = t.column("logprob");
  if (c_doc < 0 || c_idx < 0 || c_lp < 0)
    throw Error(csv_path.string() + ": expected columns doc_id, token_index, logprob");

  std::map<std::string, std::map<long, double>> raw;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto& row = t.rows[r];
    auto where = csv_path.string() + ":" + std::to_string(t.row_lines[r]);
    if (row.size() < t.header.size()) throw Error(where + ": short row");
    long idx = 0;
    double lp = 0;
    const auto& si = row[c_idx];
    const auto& sl = row[c_lp];
    auto r1 = std::from_chars(si.data(), si.data() + si.size(), idx);
    auto r2 = std::from_chars(sl.data(), sl.data() + sl.size(), lp);
    if (r1.ec != std::errc() || r2.ec != std::errc()) throw Error(where + ": unparsable number");
    if (lp > 0 || !std::isfinite(lp)) throw Error(where + ": logprob must be finite and <= 0");
    if (!raw[row[c_doc]].emplace(idx, lp).second) throw Error(where + ": duplicate token_index");
  }
  std::map<std::string, TokenLogProbs> out;
  for (auto& [doc, toks] : raw) {
    TokenLogProbs lp{doc, {}};
    long expect = 0;
    for (auto& [idx, v] : toks) {
      if (idx != expect++) throw Error(csv_path.string() + ": token_index gap in " + doc);
      lp.logprobs.push_back(v);
    }
    out.emplace(doc, std::move(lp));
  }
  return out;
}

}  // namespace revdetect
