#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <regex>

#include "revdetect/error.hpp"
#include "revdetect/textfeat.hpp"

using namespace revdetect;

namespace {

// The stated heuristic written out directly: vowel groups, min 1, silent
// trailing e dropped when there is more than one group.
int oracle_syllables(std::string w) {
  for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  static const std::regex groups("[aeiouy]+");
  int n = static_cast<int>(std::distance(std::sregex_iterator(w.begin(), w.end(), groups), std::sregex_iterator()));
  if (n > 1 && w.size() >= 2 && w.back() == 'e' && std::string("aeiouy").find(w[w.size() - 2]) == std::string::npos) --n;
  return std::max(n, 1);
}

bool consonant_le(const std::string& w) {
  return w.size() >= 3 && w.ends_with("le") && std::string("aeiouy").find(w[w.size() - 3]) == std::string::npos;
}

const DaleChallList& familiar() { return DaleChallList::builtin(); }

TextFeatures score(std::string_view s) { return score_text(tokenize(s), familiar()); }

}  // namespace

TEST_CASE("tokenize examples") {
  auto t = tokenize("Hello world. Bye.");
  CHECK(t.sentence_count == 2);
  CHECK(t.word_count == 3);
  CHECK(t.sentences[0] == std::vector<std::string>{"Hello", "world"});

  auto hi = tokenize("Hi.");
  CHECK(hi.sentence_count == 1);
  CHECK(hi.word_count == 1);
  CHECK(hi.syllable_counts == std::vector<int>{1});

  CHECK(count_syllables("cake") == 1);
  CHECK_THROWS_WITH_AS(tokenize("   \n\t"), "empty document", Error);
  CHECK_THROWS_WITH_AS(tokenize(""), "empty document", Error);
}

TEST_CASE("tokenize edge cases") {
  auto t = tokenize("No terminal punctuation here");
  CHECK(t.sentence_count == 1);
  CHECK(t.word_count == 4);

  auto q = tokenize("Really?! \"Yes.\" Then we left...");
  CHECK(q.sentence_count == 3);
  CHECK(q.word_count == 5);

  auto abbrev = tokenize("Pi is 3.14 roughly.");  // no split inside a number
  CHECK(abbrev.sentence_count == 1);

  auto punct = tokenize("Wow -- great !");
  CHECK(punct.word_count == 2);  // bare punctuation is not a word
  CHECK(punct.char_count_total == 14);
}

TEST_CASE("syllables match the heuristic") {
  for (const char* w : {"cake", "the", "be", "syllable", "readability", "rhythm", "queue", "make", "made",
                        "beautiful", "restaurant", "delicious", "experience", "I", "a", "fire", "yes",
                        "strengths", "area", "idea", "recipe", "extraordinary", "Table", "bottle"}) {
    CAPTURE(w);
    const int got = count_syllables(w);
    CHECK(got >= 1);
    if (!consonant_le(to_lower_ascii(w))) CHECK(got == oracle_syllables(w));
  }
  // consonant + "le" keeps its syllable
  CHECK(count_syllables("table") == 2);
  CHECK(count_syllables("syllable") == 3);
}

TEST_CASE("readability formulas on the worked example") {
  auto tok = tokenize("The cat sat on the mat.");
  CHECK(tok.word_count == 6);
  CHECK(tok.sentence_count == 1);
  CHECK(tok.char_count_alnum == 17);
  auto f = score_text(tok, familiar());
  const double ari = 4.71 * (17.0 / 6.0) + 0.5 * 6.0 - 21.43;
  CHECK(f.ari == doctest::Approx(ari));
  CHECK(f.ari == doctest::Approx(-5.08).epsilon(0.002));
  CHECK(f.wps == 6.0);
  CHECK(f.fr == doctest::Approx(206.835 - 1.015 * 6 - 84.6 * 1.0));
  CHECK(f.gfi == doctest::Approx(0.4 * 6.0));
  CHECK(f.dw == 0.0);
  CHECK(f.rt == doctest::Approx(23 * 14.69 / 1000.0));
  CHECK_FALSE(f.ppl.has_value());
}

TEST_CASE("formulas against an independent recount") {
  const std::string text = "Extraordinary restaurant experiences rarely disappoint. We ate noodles! Delicious?";
  auto tok = tokenize(text);
  // words: 5 + 3 + 1
  CHECK(tok.word_count == 9);
  CHECK(tok.sentence_count == 3);
  std::size_t alnum = 0, syl = 0, complex = 0;
  for (char c : text) alnum += std::isalnum(static_cast<unsigned char>(c)) != 0;
  for (auto& s : tok.sentences)
    for (auto& w : s) {
      int k = oracle_syllables(w);
      syl += k;
      complex += k >= 3;
    }
  CHECK(tok.char_count_alnum == alnum);
  auto f = score_text(tok, familiar());
  const double wps = 3.0;
  CHECK(f.ari == doctest::Approx(4.71 * alnum / 9.0 + 0.5 * wps - 21.43));
  CHECK(f.fr == doctest::Approx(206.835 - 1.015 * wps - 84.6 * syl / 9.0));
  CHECK(f.gfi == doctest::Approx(0.4 * (wps + 100.0 * complex / 9.0)));
  CHECK(f.rt == doctest::Approx(text.size() * 14.69 / 1000.0));
}

TEST_CASE("reading time of a 1000-character text") {
  std::string text;
  while (text.size() < 1000) text += "abcd ";
  text.resize(999);
  text += ".";
  auto f = score(text);
  CHECK(f.rt == doctest::Approx(14.69));
}

TEST_CASE("multi-byte characters count once") {
  auto t = tokenize("Café crème.");
  CHECK(t.char_count_total == 11);
  CHECK(t.char_count_alnum == 9);
}

TEST_CASE("self-concatenation keeps ratios and doubles counts") {
  for (std::string doc : {"The zyxx approach was idiosyncratic. Honestly, extraordinary food! ",
                          "Simple words here. More simple words now. ",
                          "We loved the pancakes; phenomenal atmosphere and impeccable service. "}) {
    auto a = score(doc);
    auto b = score(doc + doc);
    CHECK(b.wps == doctest::Approx(a.wps));
    CHECK(b.ari == doctest::Approx(a.ari));
    CHECK(b.fr == doctest::Approx(a.fr));
    CHECK(b.gfi == doctest::Approx(a.gfi));
    CHECK(b.dw == 2 * a.dw);
    CHECK(b.rt == doctest::Approx(2 * a.rt));
  }
}

TEST_CASE("appending an unfamiliar word adds one difficult word") {
  const std::string base = "The food was good and the staff were kind";
  auto a = score(base + ".");
  auto b = score(base + " zorblax.");
  CHECK(b.dw == a.dw + 1);
  CHECK(familiar().contains("the"));
  CHECK_FALSE(familiar().contains("zorblax"));
  CHECK(familiar().size() > 2500);
  // case-insensitive on the stripped token
  CHECK(score("THE, \"Cat\".").dw == 0);
}

TEST_CASE("more syllables per word lowers Flesch ease") {
  auto a = score("The cat sat on the mat.");
  auto b = score("The elephant meditated on the tapestry.");
  REQUIRE(a.wps == b.wps);
  CHECK(b.fr < a.fr);
}

TEST_CASE("invariants hold over generated documents") {
  std::mt19937 g(9);
  const std::vector<std::string> vocab{"good", "ok", "phenomenal", "I", "restaurant", "!", "really", "yes.",
                                       "tasty.", "amazing?", "bad", "incomprehensibly", "zzz", "menu,"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string doc;
    const int n = 1 + static_cast<int>(g() % 40);
    for (int i = 0; i < n; ++i) doc += vocab[g() % vocab.size()] + " ";
    if (doc.find_first_not_of(" !") == std::string::npos) doc += "word";
    auto tok = tokenize(doc);
    std::size_t words = 0;
    for (auto& s : tok.sentences) words += s.size();
    CHECK(words == tok.word_count);
    CHECK(tok.sentence_count >= 1);
    for (int s : tok.syllable_counts) CHECK(s >= 1);
    auto f = score_text(tok, familiar());
    CHECK(f.dw >= 0);
    CHECK(f.dw <= static_cast<double>(tok.word_count));
    CHECK(f.rt >= 0);
    CHECK(f.wps > 0);
    auto again = score_text(tokenize(doc), familiar());
    CHECK(std::memcmp(&again, &f, offsetof(TextFeatures, ppl)) == 0);
  }
}

TEST_CASE("Dale-Chall list file loading") {
  auto list = DaleChallList::load(REVDETECT_TEST_DATA_DIR "/dale_chall_easy_words.txt");
  CHECK(list.size() == familiar().size());
  CHECK_THROWS_AS(DaleChallList::load("/nonexistent/list.txt"), Error);
}
