#include "revdetect/textfeat.hpp"

#include <fstream>

#include "revdetect/error.hpp"
#include "revdetect/text_util.hpp"

#ifndef REVDETECT_DATA_DIR
#define REVDETECT_DATA_DIR "data"
#endif

namespace revdetect {

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Decodes one UTF-8 code point starting at s[i]; advances i. Malformed bytes
// count as one code point each.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 1;
  if (i + len > s.size()) len = 1;
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      len = 1;
      cp = b0;
      break;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

// Latin letters with diacritics (U+00C0..U+024F, minus × and ÷) count as
// alphanumeric so "café" has four letters.
bool is_alnum_cp(char32_t cp) {
  if (cp < 0x80) return is_ascii_alnum(static_cast<unsigned char>(cp));
  return cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7;
}

bool is_word_char(char32_t cp) { return is_alnum_cp(cp); }

// Strips leading and trailing characters that are not letters or digits.
std::string_view strip_punct(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e) {
    std::size_t i = b;
    if (is_word_char(next_code_point(w, i))) break;
    b = i;
  }
  while (e > b) {
    // step back to the start of the last code point
    std::size_t s = e - 1;
    while (s > b && (static_cast<unsigned char>(w[s]) & 0xC0) == 0x80) --s;
    std::size_t i = s;
    if (is_word_char(next_code_point(w, i))) break;
    e = s;
  }
  return w.substr(b, e - b);
}

bool ends_sentence(std::string_view raw) {
  // closing quotes/brackets may follow the terminal mark: `great!"`
  while (!raw.empty()) {
    char c = raw.back();
    if (c == '"' || c == '\'' || c == ')' || c == ']') {
      raw.remove_suffix(1);
      continue;
    }
    // UTF-8 right double/single quotation marks
    if (raw.size() >= 3 && raw.substr(raw.size() - 3) == "\xE2\x80\x9D") { raw.remove_suffix(3); continue; }
    if (raw.size() >= 3 && raw.substr(raw.size() - 3) == "\xE2\x80\x99") { raw.remove_suffix(3); continue; }
    break;
  }
  if (raw.empty()) return false;
  char c = raw.back();
  return c == '.' || c == '!' || c == '?';
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

int count_syllables(std::string_view word) {
  std::string w;
  for (char c : word) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'z') w.push_back(c);
  }
  int groups = 0;
  bool prev_vowel = false;
  for (char c : w) {
    bool v = is_vowel(c);
    if (v && !prev_vowel) ++groups;
    prev_vowel = v;
  }
  const std::size_t n = w.size();
  if (groups > 1 && n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2])) {
    // consonant + "le" keeps its syllable: ta-ble, ap-ple
    bool le = w[n - 2] == 'l' && n >= 3 && !is_vowel(w[n - 3]);
    if (!le) --groups;
  }
  return groups < 1 ? 1 : groups;
}

TokenizedText tokenize(std::string_view text) {
  if (trim(text).empty()) throw Error("empty document");

  TokenizedText t;
  for (std::size_t i = 0; i < text.size();) {
    char32_t cp = next_code_point(text, i);
    ++t.char_count_total;
    if (is_alnum_cp(cp)) ++t.char_count_alnum;
  }

  std::vector<std::string> current;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (start == i) break;
    std::string_view raw = text.substr(start, i - start);
    std::string_view word = strip_punct(raw);
    if (!word.empty()) {
      current.emplace_back(word);
      t.syllable_counts.push_back(count_syllables(word));
    }
    if (ends_sentence(raw) && !current.empty()) {
      t.sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) t.sentences.push_back(std::move(current));

  t.sentence_count = t.sentences.size();
  for (auto& s : t.sentences) t.word_count += s.size();
  return t;
}

DaleChallList::DaleChallList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

DaleChallList DaleChallList::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open Dale-Chall list: " + file.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = trim(line);
    if (!w.empty()) words.insert(to_lower_ascii(w));
  }
  if (words.empty()) throw Error("Dale-Chall list is empty: " + file.string());
  return DaleChallList(std::move(words));
}

const DaleChallList& DaleChallList::builtin() {
  static const DaleChallList list =
      load(std::filesystem::path(REVDETECT_DATA_DIR) / "dale_chall_easy_words.txt");
  return list;
}

bool DaleChallList::contains(std::string_view lowercase_word) const {
  return words_.find(std::string(lowercase_word)) != words_.end();
}

TextFeatures score_text(const TokenizedText& tok, const DaleChallList& familiar) {
  if (tok.word_count == 0 || tok.sentence_count == 0)
    throw Error("score_text: document has no words");
  if (familiar.empty()) throw Error("score_text: empty Dale-Chall list");

  const double words = static_cast<double>(tok.word_count);
  const double sentences = static_cast<double>(tok.sentence_count);
  double syllables = 0;
  std::size_t complex_words = 0;
  for (int s : tok.syllable_counts) {
    syllables += s;
    if (s >= 3) ++complex_words;
  }
  std::size_t difficult = 0;
  for (auto& sentence : tok.sentences)
    for (auto& w : sentence)
      if (!familiar.contains(to_lower_ascii(w))) ++difficult;

  const double wps = words / sentences;
  TextFeatures f;
  f.ari = 4.71 * (static_cast<double>(tok.char_count_alnum) / words) + 0.5 * wps - 21.43;
  f.fr = 206.835 - 1.015 * wps - 84.6 * (syllables / words);
  f.gfi = 0.4 * (wps + 100.0 * (static_cast<double>(complex_words) / words));
  f.dw = static_cast<double>(difficult);
  f.rt = static_cast<double>(tok.char_count_total) * kMsPerCharacter / 1000.0;
  f.wps = wps;
  return f;
}

}  // namespace revdetect
