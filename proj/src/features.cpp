#include "revdetect/features.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "revdetect/error.hpp"

namespace revdetect {

const std::vector<std::string>& text_feature_names() {
  static const std::vector<std::string> v{"ari", "fr", "dw", "gfi", "rt", "wps", "ppl"};
  return v;
}
const std::vector<std::string>& color_feature_names() {
  static const std::vector<std::string> v{"bri", "sat", "con", "cla", "war", "col"};
  return v;
}
const std::vector<std::string>& figure_ground_feature_names() {
  static const std::vector<std::string> v{"sd", "cd", "td"};
  return v;
}
const std::vector<std::string>& composition_feature_names() {
  static const std::vector<std::string> v{"dd", "rot", "hpvb", "vpvb", "hcvb", "vcvb"};
  return v;
}

std::vector<std::string> image_feature_names() {
  std::vector<std::string> v = color_feature_names();
  for (auto* group : {&figure_ground_feature_names(), &composition_feature_names()})
    v.insert(v.end(), group->begin(), group->end());
  return v;
}

FeatureSet parse_feature_set(const std::string& s) {
  if (s == "text") return FeatureSet::Text;
  if (s == "image") return FeatureSet::Image;
  if (s == "multi" || s == "both" || s == "multimodal") return FeatureSet::Multi;
  if (s == "color") return FeatureSet::Color;
  throw Error("unknown feature set '" + s + "' (expected text, image, multi or color)");
}

std::string to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::Text: return "text";
    case FeatureSet::Image: return "image";
    case FeatureSet::Multi: return "multi";
    case FeatureSet::Color: return "color";
  }
  return "?";
}

std::vector<std::string> feature_set_columns(FeatureSet s) {
  switch (s) {
    case FeatureSet::Text: return text_feature_names();
    case FeatureSet::Image: return image_feature_names();
    case FeatureSet::Color: return color_feature_names();
    case FeatureSet::Multi: {
      auto v = text_feature_names();
      auto img = image_feature_names();
      v.insert(v.end(), img.begin(), img.end());
      return v;
    }
  }
  return {};
}

std::array<double, 15> ImageFeatures::values() const {
  return {color.bri,         color.sat,          color.con,        color.cla,
          color.war,         color.col,          figure_ground.sd, figure_ground.cd,
          figure_ground.td,  composition.dd,     composition.rot,  composition.hpvb,
          composition.vpvb,  composition.hcvb,   composition.vcvb};
}

ImageFeatures extract_image_features(const ImageMatrix& img, ImageDebug* debug) {
  ImageFeatures f;
  f.color = color_features(img);
  SaliencyMap sal = saliency_map(img);
  FigureGroundMask mask = figure_ground(img, sal);
  f.figure_ground = figure_ground_features(img, mask);
  f.composition = composition_features(img, mask);
  if (debug) {
    debug->saliency = std::move(sal);
    debug->mask = std::move(mask);
  }
  return f;
}

std::array<double, 7> text_feature_values(const TextFeatures& f) {
  if (!f.ppl) throw Error("text features are missing perplexity");
  return {f.ari, f.fr, f.dw, f.gfi, f.rt, f.wps, *f.ppl};
}

double NGramPerplexity::perplexity(const ReviewRecord& rec) const {
  if (auto it = held_out_.find(rec.id); it != held_out_.end())
    return revdetect::perplexity(folds_[it->second], rec.text);
  return revdetect::perplexity(model_, rec.text);
}

std::string NGramPerplexity::describe() const {
  const auto& o = model_.options();
  return "ngram(order=" + std::to_string(o.order) + ",k=" + std::to_string(o.k) +
         ",vocab=" + std::to_string(model_.vocabulary_size()) + ")";
}

double ImportedPerplexity::perplexity(const ReviewRecord& rec) const {
  auto it = logprobs_.find(rec.id);
  if (it == logprobs_.end()) throw Error("no imported log-probabilities for '" + rec.id + "'");
  return revdetect::perplexity(it->second);
}

std::unique_ptr<PerplexityProvider> train_ngram_provider(
    const Manifest& manifest, const std::map<std::string, Split>& splits, const NGramOptions& opts) {
  std::vector<std::string> texts, ids;
  for (auto& r : manifest.records) {
    auto it = splits.find(r.id);
    if (r.label == 0 && it != splits.end() && it->second == Split::Train) {
      texts.push_back(r.text);
      ids.push_back(r.id);
    }
  }
  if (texts.empty()) throw Error("n-gram provider: no authentic training reviews");
  NGramModel full = NGramModel::train(texts, opts);
  const std::size_t k = std::min<std::size_t>(5, texts.size());
  if (k < 2) return std::make_unique<NGramPerplexity>(std::move(full));

  // fold = position mod k, so the assignment follows manifest order
  std::vector<NGramModel> folds;
  std::map<std::string, int> held_out;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (i % k == f)
        held_out[ids[i]] = static_cast<int>(f);
      else
        rest.push_back(texts[i]);
    }
    folds.push_back(NGramModel::train(rest, opts));
  }
  return std::make_unique<NGramPerplexity>(std::move(full), std::move(folds), std::move(held_out));
}

ExtractResult extract_features(const Manifest& manifest, const std::map<std::string, Split>* splits,
                               const ExtractOptions& opts) {
  if (!opts.text && !opts.image) throw Error("extract: enable at least one feature group");
  if (opts.text && !opts.perplexity) throw Error("extract: text features need a perplexity provider");
  const DaleChallList& familiar = opts.familiar_words ? *opts.familiar_words : DaleChallList::builtin();

  ExtractResult out;
  auto& m = out.matrix;
  if (opts.text) m.schema = text_feature_names();
  if (opts.image) {
    auto img = image_feature_names();
    m.schema.insert(m.schema.end(), img.begin(), img.end());
  }

  const std::size_t n = manifest.records.size();
  const std::size_t d = m.schema.size();
  std::vector<std::vector<double>> rows(n);
  std::vector<std::string> errors(n);

  auto work = [&](std::size_t i) {
    const ReviewRecord& rec = manifest.records[i];
    try {
      std::vector<double> row;
      row.reserve(d);
      if (opts.text) {
        TextFeatures tf = score_text(tokenize(rec.text), familiar);
        tf.ppl = opts.perplexity->perplexity(rec);
        auto v = text_feature_values(tf);
        row.insert(row.end(), v.begin(), v.end());
      }
      if (opts.image) {
        const auto path = manifest.image_file(rec);
        ImageMatrix img = load_image(path);
        ImageDebug dbg;
        auto v = extract_image_features(img, opts.dump_debug ? &dbg : nullptr).values();
        row.insert(row.end(), v.begin(), v.end());
        if (opts.dump_debug) {
          auto stem = path;
          save_plane_png(stem.replace_extension(".saliency.png"), dbg.saliency.map);
          Plane mask(dbg.mask.width, dbg.mask.height);
          for (std::size_t k = 0; k < mask.values.size(); ++k) mask.values[k] = dbg.mask.figure[k];
          stem = path;
          save_plane_png(stem.replace_extension(".mask.png"), mask);
        }
      }
      rows[i] = std::move(row);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) work(i);
      });
  }

  // single ordered writer
  for (std::size_t i = 0; i < n; ++i) {
    const ReviewRecord& rec = manifest.records[i];
    if (!errors[i].empty()) {
      out.diagnostics.push_back({0, rec.id, errors[i]});
      continue;
    }
    std::optional<Split> split;
    if (splits) {
      auto it = splits->find(rec.id);
      if (it != splits->end()) split = it->second;
    } else {
      split = rec.split;
    }
    m.add_row(rec.id, rows[i], rec.label, split);
  }
  return out;
}

}  // namespace revdetect
