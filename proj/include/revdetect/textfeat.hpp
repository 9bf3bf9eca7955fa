#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace revdetect {

struct TokenizedText {
  std::vector<std::vector<std::string>> sentences;  // words, punctuation stripped
  std::size_t word_count = 0;
  std::size_t sentence_count = 0;
  std::size_t char_count_alnum = 0;
  std::size_t char_count_total = 0;  // every code point, whitespace included
  std::vector<int> syllable_counts;  // one per word, in reading order
};

/// Splits into sentences on . ! ? followed by whitespace or end of text.
/// Throws Error("empty document") when the text is blank.
TokenizedText tokenize(std::string_view text);

/// Vowel-group syllable estimate (a e i o u y), at least 1.
int count_syllables(std::string_view word);

/// Lowercased familiar-word list; words not on it are "difficult".
class DaleChallList {
 public:
  DaleChallList() = default;
  explicit DaleChallList(std::unordered_set<std::string> words);

  static DaleChallList load(const std::filesystem::path& file);
  /// The list shipped in the data directory the library was built with.
  static const DaleChallList& builtin();

  bool contains(std::string_view lowercase_word) const;
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Per-review readability attributes. ppl is filled in by the lm module.
struct TextFeatures {
  double ari = 0;
  double fr = 0;
  double dw = 0;
  double gfi = 0;
  double rt = 0;  // seconds
  double wps = 0;
  std::optional<double> ppl;
};

inline constexpr double kMsPerCharacter = 14.69;

TextFeatures score_text(const TokenizedText& tok, const DaleChallList& familiar);

std::string to_lower_ascii(std::string_view s);

}  // namespace revdetect
