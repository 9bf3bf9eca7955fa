#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "revdetect/csv.hpp"
#include "revdetect/image.hpp"

// Writes a two-class manifest plus PNG images. Class 1 texts use words of
// three or more syllables and class 1 images are the class 0 recipe with
// every channel raised by 40 (base channels stay <= 215, so V rises by 40).
struct SyntheticCorpus {
  std::filesystem::path manifest;
  std::filesystem::path image_root;
  std::size_t size = 0;
};

inline SyntheticCorpus write_synthetic_corpus(const std::filesystem::path& dir, std::size_t n,
                                              std::uint64_t seed, int image_size = 48) {
  namespace fs = std::filesystem;
  using revdetect::Rgb;
  fs::create_directories(dir / "images");
  std::mt19937_64 g(seed);
  auto pick = [&](const std::vector<std::string>& words) { return words[g() % words.size()]; };

  const std::vector<std::string> plain{"the", "food", "was", "good", "and", "we", "ate", "here", "fish",
                                       "soup", "hot", "nice", "staff", "bread", "fresh", "back", "went",
                                       "cake", "a", "lot", "of", "fun", "great", "place", "to", "eat"};
  const std::vector<std::string> fancy{"extraordinary", "culinary", "experience", "delicious", "atmosphere",
                                       "impeccable", "remarkable", "exquisitely", "memorable", "phenomenal",
                                       "sophisticated", "innovative", "delectable", "unforgettable",
                                       "meticulously", "presentation", "ambiance", "accommodating"};

  std::ofstream out(dir / "manifest.csv");
  revdetect::csv::write_row(out, {"id", "text", "image_path", "label"});
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    std::string text;
    const int sentences = 2 + static_cast<int>(g() % 3);
    for (int s = 0; s < sentences; ++s) {
      const int words = label ? 9 + static_cast<int>(g() % 8) : 5 + static_cast<int>(g() % 6);
      for (int w = 0; w < words; ++w) {
        // generated reviews still use some short words
        std::string word = label && (g() % 3 != 0) ? pick(fancy) : pick(plain);
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        text += word;
        text += (w + 1 == words) ? ". " : " ";
      }
    }
    text.pop_back();

    // smooth random background with one coloured block
    const int lift = label ? 40 : 0;
    revdetect::ImageMatrix img(image_size, image_size);
    const int base_r = 40 + static_cast<int>(g() % 120), base_g = 40 + static_cast<int>(g() % 120),
              base_b = 40 + static_cast<int>(g() % 120);
    const int bx = static_cast<int>(g() % (image_size / 2)), by = static_cast<int>(g() % (image_size / 2));
    const int bw = image_size / 4 + static_cast<int>(g() % (image_size / 4));
    for (int y = 0; y < image_size; ++y)
      for (int x = 0; x < image_size; ++x) {
        const bool block = x >= bx && x < bx + bw && y >= by && y < by + bw;
        const int shade = (x + y) % 16 + static_cast<int>(g() % 8);
        int r = base_r + shade, gg = base_g + shade, b = base_b + shade;
        if (block) {
          r = 215 - shade;
          gg = 120 + shade;
          b = 20 + shade;
        }
        img.at(x, y) = Rgb{static_cast<std::uint8_t>(r + lift), static_cast<std::uint8_t>(gg + lift),
                           static_cast<std::uint8_t>(b + lift)};
      }
    const std::string id = "rev" + std::to_string(i);
    revdetect::save_image(dir / "images" / (id + ".png"), img);
    revdetect::csv::write_row(out, {id, text, "images/" + id + ".png", std::to_string(label)});
  }
  return {dir / "manifest.csv", dir, n};
}
