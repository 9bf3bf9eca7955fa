#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "revdetect/composition.hpp"
#include "revdetect/corpus.hpp"
#include "revdetect/feature_matrix.hpp"
#include "revdetect/image.hpp"
#include "revdetect/imgfeat.hpp"
#include "revdetect/lm.hpp"
#include "revdetect/textfeat.hpp"

namespace revdetect {

// Column names in fixed output order.
const std::vector<std::string>& text_feature_names();         // ari fr dw gfi rt wps ppl
const std::vector<std::string>& color_feature_names();        // bri sat con cla war col
const std::vector<std::string>& figure_ground_feature_names();  // sd cd td
const std::vector<std::string>& composition_feature_names();  // dd rot hpvb vpvb hcvb vcvb
std::vector<std::string> image_feature_names();               // color + figure-ground + composition

/// Experimental arms: text, image, multi (text + image), color (ablation).
enum class FeatureSet { Text, Image, Multi, Color };
FeatureSet parse_feature_set(const std::string& s);
std::string to_string(FeatureSet s);
std::vector<std::string> feature_set_columns(FeatureSet s);

struct ImageFeatures {
  ColorFeatures color;
  FigureGroundFeatures figure_ground;
  CompositionFeatures composition;

  std::array<double, 15> values() const;
};

struct ImageDebug {
  SaliencyMap saliency;
  FigureGroundMask mask;
};

/// Full 15-attribute pass. Throws for images without a salient region.
ImageFeatures extract_image_features(const ImageMatrix& img, ImageDebug* debug = nullptr);

std::array<double, 7> text_feature_values(const TextFeatures& f);

/// Source of per-review perplexity.
class PerplexityProvider {
 public:
  virtual ~PerplexityProvider() = default;
  virtual double perplexity(const ReviewRecord& rec) const = 0;
  virtual std::string describe() const = 0;
};

class NGramPerplexity : public PerplexityProvider {
 public:
  explicit NGramPerplexity(NGramModel model) : model_(std::move(model)) {}
  /// Records listed in held_out are scored by folds[held_out[id]], a model
  /// that never saw them; everything else by the full model.
  NGramPerplexity(NGramModel model, std::vector<NGramModel> folds, std::map<std::string, int> held_out)
      : model_(std::move(model)), folds_(std::move(folds)), held_out_(std::move(held_out)) {}
  double perplexity(const ReviewRecord& rec) const override;
  std::string describe() const override;

 private:
  NGramModel model_;
  std::vector<NGramModel> folds_;
  std::map<std::string, int> held_out_;
};

class ImportedPerplexity : public PerplexityProvider {
 public:
  explicit ImportedPerplexity(std::map<std::string, TokenLogProbs> logprobs)
      : logprobs_(std::move(logprobs)) {}
  double perplexity(const ReviewRecord& rec) const override;
  std::string describe() const override { return "imported log-probabilities"; }

 private:
  std::map<std::string, TokenLogProbs> logprobs_;
};

/// Trains the built-in provider on authentic reviews of the training split.
/// Those reviews are themselves scored out-of-fold (5 folds), otherwise
/// their perplexity is in-sample and far below that of unseen reviews.
std::unique_ptr<PerplexityProvider> train_ngram_provider(
    const Manifest& manifest, const std::map<std::string, Split>& splits, const NGramOptions& opts);

struct ExtractOptions {
  bool text = true;
  bool image = true;
  const DaleChallList* familiar_words = nullptr;  // default: built-in list
  const PerplexityProvider* perplexity = nullptr;  // required when text is on
  int threads = 1;
  bool dump_debug = false;  // writes <image>.saliency.png and <image>.mask.png
};

struct ExtractResult {
  FeatureMatrix matrix;
  std::vector<RowDiagnostic> diagnostics;
};

/// Feature rows in manifest order. Records that fail (undecodable image,
/// no salient region) are skipped with a diagnostic.
ExtractResult extract_features(const Manifest& manifest, const std::map<std::string, Split>* splits,
                               const ExtractOptions& opts);

}  // namespace revdetect
