#include "revdetect/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "revdetect/analysis.hpp"
#include "revdetect/corpus.hpp"
#include "revdetect/costmodel.hpp"
#include "revdetect/csv.hpp"
#include "revdetect/error.hpp"
#include "revdetect/features.hpp"
#include "revdetect/log.hpp"
#include "revdetect/ml.hpp"
#include "revdetect/rng.hpp"

namespace revdetect {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// JSON config files: top-level keys are global options, nested objects are
// subcommand sections with the same keys as the command-line flags.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void walk(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        walk(value, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
  }
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
};

struct CorpusArgs {
  std::string manifest;
  std::string image_root;
  std::string column_map;
  std::vector<double> fractions{0.6, 0.2, 0.2};
  bool stratify = false;
  bool respect_preassigned = false;
};

std::string config_hash(const CLI::App& sub, const Common& common) {
  std::vector<std::string> parts;
  parts.push_back("command=" + sub.get_name());
  parts.push_back("seed=" + std::to_string(common.seed));
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name().empty() || opt->get_name() == "--help") continue;
    std::string v;
    for (auto& r : opt->results()) v += r + ";";
    parts.push_back(opt->get_name() + "=" + v);
  }
  std::sort(parts.begin(), parts.end());
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto& p : parts) h = fnv1a(p + "\n", h);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::vector<std::string> repro_header(const std::string& command, const Common& common, const std::string& hash) {
  return {" tool=revdetect " + std::string(kToolVersion), " command=" + command,
          " seed=" + std::to_string(common.seed), " config_hash=" + hash};
}

json repro_json(const std::string& command, const Common& common, const std::string& hash) {
  return {{"tool", "revdetect"}, {"tool_version", kToolVersion}, {"command", command},
          {"seed", common.seed}, {"config_hash", hash}};
}

SplitFractions to_fractions(const std::vector<double>& f) {
  if (f.size() != 3) throw Error("--fractions needs exactly three values");
  return {f[0], f[1], f[2]};
}

Manifest open_manifest(const CorpusArgs& a) {
  fs::path root = a.image_root;
  if (root.empty()) root = fs::path(a.manifest).parent_path();
  ColumnMapping mapping;
  if (!a.column_map.empty()) mapping = load_column_mapping(a.column_map);
  auto t0 = std::chrono::steady_clock::now();
  Manifest m = load_manifest(a.manifest, root, mapping);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  log::info("load: " + std::to_string(m.records.size()) + " records in " + std::to_string(ms) + " ms");
  if (!m.diagnostics.empty()) {
    log::warn("load: " + std::to_string(m.diagnostics.size()) + " rows rejected");
    for (std::size_t i = 0; i < m.diagnostics.size() && i < 20; ++i) {
      auto& d = m.diagnostics[i];
      log::warn("  line " + std::to_string(d.line) + " (" + d.id + "): " + d.message);
    }
  }
  if (m.records.empty()) throw Error("manifest contains no valid records");
  return m;
}

SplitAssignment compute_splits(const Manifest& m, const CorpusArgs& a, const Common& c) {
  SplitOptions opts;
  opts.seed = c.seed;
  opts.fractions = to_fractions(a.fractions);
  opts.stratify = a.stratify;
  opts.respect_preassigned = a.respect_preassigned;
  return make_splits(m.records, opts);
}

void add_corpus_options(CLI::App* sub, CorpusArgs& a, bool with_split_opts) {
  sub->add_option("--manifest", a.manifest, "CSV manifest (id,text,image_path,label[,rating,split])")->required();
  sub->add_option("--image-root", a.image_root, "Directory image paths are relative to (default: manifest directory)")
      ->envname("REVDETECT_DATASET_ROOT");
  sub->add_option("--column-map", a.column_map, "JSON object mapping canonical column names to manifest columns");
  if (with_split_opts) {
    sub->add_option("--fractions", a.fractions, "train,val,test fractions")->delimiter(',')->expected(3);
    sub->add_flag("--stratify", a.stratify, "Apportion each label separately");
    sub->add_flag("--respect-preassigned", a.respect_preassigned, "Keep the manifest's split column where set");
  }
}

FeatureMatrix load_features_for(const std::string& path, const std::vector<std::string>& columns) {
  FeatureCsv f = read_feature_csv(path);
  for (auto& c : columns) {
    if (std::find(f.matrix.schema.begin(), f.matrix.schema.end(), c) == f.matrix.schema.end())
      throw Error("features file " + path + " lacks column '" + c + "' required by the model");
  }
  return f.matrix.select_columns(columns);
}

FeatureMatrix rows_for_split(const FeatureMatrix& m, const std::string& split) {
  if (split == "all") return m;
  auto s = parse_split(split);
  if (!s) throw Error("unknown split '" + split + "'");
  FeatureMatrix sub = m.subset(*s);
  if (sub.rows() == 0) throw Error("no rows in split '" + split + "'");
  return sub;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detect machine-generated review/image pairs with handcrafted features", "revdetect"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_file;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config_file = args[i + 1];
  app.set_config("--config", "", "TOML/INI or JSON config file with the same keys as the flags");
  if (config_file.size() > 5 && config_file.substr(config_file.size() - 5) == ".json")
    app.config_formatter(std::make_shared<JsonConfig>());

  Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  // split
  CorpusArgs split_args;
  std::string split_out;
  auto* split_cmd = app.add_subcommand("split", "Assign records to train/val/test");
  add_corpus_options(split_cmd, split_args, true);
  split_cmd->add_option("--out", split_out, "Output CSV (id,split)")->required();

  // extract
  CorpusArgs ex_args;
  std::string ex_out, ex_groups = "multi", ex_split_file, ex_logprobs, ex_dale;
  int ngram_order = 3;
  double ngram_k = 0.01;
  bool debug_dump = false;
  auto* ex_cmd = app.add_subcommand("extract", "Compute the feature CSV for a manifest");
  add_corpus_options(ex_cmd, ex_args, true);
  ex_cmd->add_option("--features", ex_groups, "Feature groups: text, image or multi")->capture_default_str();
  ex_cmd->add_option("--out", ex_out, "Output feature CSV")->required();
  ex_cmd->add_option("--split-file", ex_split_file, "Existing split CSV (otherwise computed from --seed)");
  ex_cmd->add_option("--logprobs", ex_logprobs, "Per-token log-probabilities CSV for perplexity");
  ex_cmd->add_option("--dale-chall", ex_dale, "Familiar-word list (one word per line)");
  ex_cmd->add_option("--ngram-order", ngram_order, "Built-in n-gram order")->check(CLI::Range(1, 5))->capture_default_str();
  ex_cmd->add_option("--ngram-k", ngram_k, "Built-in n-gram add-k constant")->capture_default_str();
  ex_cmd->add_flag("--debug-dump", debug_dump, "Write saliency and mask PNGs beside each image");

  // stats
  std::string st_features, st_out_dir, st_set;
  auto* st_cmd = app.add_subcommand("stats", "Per-class means/stds and ANOVA for every feature");
  st_cmd->add_option("--features-file", st_features, "Feature CSV from extract")->required();
  st_cmd->add_option("--out-dir", st_out_dir, "Directory for stats.csv and stats.txt")->required();
  st_cmd->add_option("--feature-set", st_set, "Restrict to text, image, multi or color");

  // train
  std::string tr_features, tr_set = "multi", tr_model = "forest", tr_out, tr_report;
  LogisticOptions lr_opts;
  ForestOptions rf_opts;
  std::string max_features = "sqrt";
  bool no_bootstrap = false;
  auto* tr_cmd = app.add_subcommand("train", "Train a detector on the train split");
  tr_cmd->add_option("--features-file", tr_features, "Feature CSV with split column")->required();
  tr_cmd->add_option("--feature-set", tr_set, "text, image, multi or color")->capture_default_str();
  tr_cmd->add_option("--model", tr_model, "logistic or forest")
      ->check(CLI::IsMember({"logistic", "forest"}))->capture_default_str();
  tr_cmd->add_option("--out", tr_out, "Model JSON")->required();
  tr_cmd->add_option("--report", tr_report, "Validation report JSON (default: <out>.validation.json)");
  tr_cmd->add_option("--l2", lr_opts.l2, "Logistic L2 strength")->capture_default_str();
  tr_cmd->add_option("--epochs", lr_opts.epochs, "Logistic epochs")->capture_default_str();
  tr_cmd->add_option("--step", lr_opts.step, "Logistic initial step")->capture_default_str();
  tr_cmd->add_option("--trees", rf_opts.n_trees, "Forest size")->check(CLI::PositiveNumber)->capture_default_str();
  tr_cmd->add_option("--max-features", max_features, "sqrt, log2 or all")
      ->check(CLI::IsMember({"sqrt", "log2", "all"}))->capture_default_str();
  tr_cmd->add_flag("--no-bootstrap", no_bootstrap, "Grow every tree on all training rows");

  // evaluate
  std::string ev_model, ev_features, ev_split = "test", ev_out;
  auto* ev_cmd = app.add_subcommand("evaluate", "Accuracy/precision/recall/F1 on a split");
  ev_cmd->add_option("--model", ev_model, "Model JSON")->required();
  ev_cmd->add_option("--features-file", ev_features, "Feature CSV")->required();
  ev_cmd->add_option("--split", ev_split, "train, val, test or all")->capture_default_str();
  ev_cmd->add_option("--out", ev_out, "Report JSON (default: print only)");

  // predict
  std::string pr_model, pr_features, pr_split = "all", pr_out;
  auto* pr_cmd = app.add_subcommand("predict", "Per-record class-1 probabilities");
  pr_cmd->add_option("--model", pr_model, "Model JSON")->required();
  pr_cmd->add_option("--features-file", pr_features, "Feature CSV")->required();
  pr_cmd->add_option("--split", pr_split, "train, val, test or all")->capture_default_str();
  pr_cmd->add_option("--out", pr_out, "Output CSV (id,probability,label)")->required();

  // explain
  std::string xp_model, xp_features, xp_split = "test", xp_bg_split = "train", xp_out;
  int xp_samples = 200;
  std::size_t xp_bg_size = 100, xp_max_rows = 0;
  auto* xp_cmd = app.add_subcommand("explain", "Shapley feature attribution");
  xp_cmd->add_option("--model", xp_model, "Model JSON")->required();
  xp_cmd->add_option("--features-file", xp_features, "Feature CSV")->required();
  xp_cmd->add_option("--split", xp_split, "Rows to explain")->capture_default_str();
  xp_cmd->add_option("--background-split", xp_bg_split, "Rows used for imputation")->capture_default_str();
  xp_cmd->add_option("--background-size", xp_bg_size, "Background rows sampled (0 = all)")->capture_default_str();
  xp_cmd->add_option("--max-rows", xp_max_rows, "Explain at most this many rows (0 = all)")->capture_default_str();
  xp_cmd->add_option("--samples", xp_samples, "Permutations per row")->capture_default_str();
  xp_cmd->add_option("--out", xp_out, "Attribution CSV (summary goes to <out>.txt)")->required();

  // cost
  CostInputs cost_in;
  std::string cost_out;
  auto* cost_cmd = app.add_subcommand("cost", "Generation cost calculator");
  cost_cmd->add_option("--ic", cost_in.input_tokens, "Mean input tokens per review")->capture_default_str();
  cost_cmd->add_option("--oc", cost_in.output_tokens, "Mean output tokens per review")->capture_default_str();
  cost_cmd->add_option("--m", cost_in.reviews, "Number of reviews")->capture_default_str();
  cost_cmd->add_option("--price-in", cost_in.price_in_per_1k, "$ per 1K input tokens")->capture_default_str();
  cost_cmd->add_option("--price-out", cost_in.price_out_per_1k, "$ per 1K output tokens")->capture_default_str();
  cost_cmd->add_option("--price-image", cost_in.price_per_image, "$ per image")->capture_default_str();
  cost_cmd->add_option("--out", cost_out, "Write the breakdown as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string hash = config_hash(*sub, common);
  const std::string cmd = sub->get_name();
  auto stage_start = std::chrono::steady_clock::now();

  try {
    if (sub == split_cmd) {
      Manifest m = open_manifest(split_args);
      SplitAssignment a = compute_splits(m, split_args, common);
      write_split_csv(split_out, a);
      auto s = a.sizes();
      out << "train=" << s[0] << " val=" << s[1] << " test=" << s[2] << '\n';
    } else if (sub == ex_cmd) {
      FeatureSet groups = parse_feature_set(ex_groups);
      if (groups == FeatureSet::Color) throw Error("extract: use text, image or multi");
      const bool want_text = groups != FeatureSet::Image;
      const bool want_image = groups != FeatureSet::Text;
      Manifest m = open_manifest(ex_args);

      std::map<std::string, Split> splits;
      if (!ex_split_file.empty()) {
        splits = read_split_csv(ex_split_file);
      } else {
        splits = compute_splits(m, ex_args, common).as_map();
      }

      std::optional<DaleChallList> dale;
      if (!ex_dale.empty()) dale = DaleChallList::load(ex_dale);
      std::unique_ptr<PerplexityProvider> ppl;
      if (want_text) {
        if (!ex_logprobs.empty()) {
          ppl = std::make_unique<ImportedPerplexity>(load_logprobs(ex_logprobs));
        } else {
          NGramOptions o;
          o.order = ngram_order;
          o.k = ngram_k;
          ppl = train_ngram_provider(m, splits, o);
        }
        log::info("extract: perplexity provider " + ppl->describe());
      }

      ExtractOptions opts;
      opts.text = want_text;
      opts.image = want_image;
      opts.familiar_words = dale ? &*dale : nullptr;
      opts.perplexity = ppl.get();
      opts.threads = common.threads;
      opts.dump_debug = debug_dump;
      ExtractResult r = extract_features(m, &splits, opts);
      for (auto& d : r.diagnostics) log::warn("extract: " + d.id + ": " + d.message);

      auto header = repro_header(cmd, common, hash);
      header.push_back(" feature_groups=" + to_string(groups));
      if (ppl) header.push_back(" perplexity=" + ppl->describe());
      write_feature_csv(ex_out, r.matrix, header);
      out << "extracted " << r.matrix.rows() << " rows x " << r.matrix.cols() << " features";
      if (!r.diagnostics.empty()) out << " (" << r.diagnostics.size() << " records skipped)";
      out << '\n';
      if (r.matrix.rows() == 0) throw Error("no feature rows produced");
    } else if (sub == st_cmd) {
      FeatureCsv f = read_feature_csv(st_features);
      FeatureMatrix mat = f.matrix;
      if (!st_set.empty()) mat = mat.select_columns(feature_set_columns(parse_feature_set(st_set)));
      auto rows = class_summary(mat);
      fs::create_directories(st_out_dir);
      {
        std::ofstream csv_out(fs::path(st_out_dir) / "stats.csv", std::ios::binary);
        for (auto& h : repro_header(cmd, common, hash)) csv_out << '#' << h << '\n';
        write_summary_csv(csv_out, rows);
      }
      std::ostringstream text;
      write_summary_text(text, rows);
      std::ofstream(fs::path(st_out_dir) / "stats.txt", std::ios::binary) << text.str();
      out << text.str();
    } else if (sub == tr_cmd) {
      const FeatureSet set = parse_feature_set(tr_set);
      FeatureCsv f = read_feature_csv(tr_features);
      FeatureMatrix all = f.matrix.select_columns(feature_set_columns(set));
      FeatureMatrix train = all.subset(Split::Train);
      FeatureMatrix val = all.subset(Split::Val);
      if (train.rows() < 2) throw Error("train split has fewer than 2 rows");

      Model model;
      if (tr_model == "logistic") {
        lr_opts.seed = common.seed;
        model = fit_logistic_model(train, lr_opts, val.rows() ? &val : nullptr);
      } else {
        rf_opts.seed = common.seed;
        rf_opts.threads = common.threads;
        rf_opts.bootstrap = !no_bootstrap;
        rf_opts.max_features = max_features == "sqrt" ? MaxFeatures::Sqrt
                               : max_features == "log2" ? MaxFeatures::Log2 : MaxFeatures::All;
        model = fit_forest_model(train, rf_opts);
      }
      model.provenance = repro_json(cmd, common, hash);
      model.provenance["feature_set"] = to_string(set);
      model.provenance["features_file_header"] = f.comments;
      save_model(model, tr_out);

      json report = repro_json(cmd, common, hash);
      report["model_type"] = tr_model;
      report["feature_set"] = to_string(set);
      report["train_rows"] = train.rows();
      if (val.rows()) {
        auto p = predict(model, val);
        report["validation"] = to_json(evaluate(p.label, val.labels));
      }
      write_json(tr_report.empty() ? tr_out + ".validation.json" : tr_report, report);
      out << "trained " << tr_model << " on " << train.rows() << " rows (" << to_string(set) << ")";
      if (val.rows()) out << ", validation accuracy " << report["validation"]["accuracy"].get<double>();
      out << '\n';
    } else if (sub == ev_cmd) {
      Model model = load_model(ev_model);
      FeatureMatrix rows = rows_for_split(load_features_for(ev_features, model.schema), ev_split);
      if (!rows.has_labels()) throw Error("features file has no labels");
      auto p = predict(model, rows);
      EvalReport r = evaluate(p.label, rows.labels);
      json j = repro_json(cmd, common, hash);
      j["split"] = ev_split;
      j["model_type"] = model.type() == ModelType::Logistic ? "logistic" : "forest";
      if (model.provenance.contains("feature_set")) j["feature_set"] = model.provenance["feature_set"];
      j["report"] = to_json(r);
      if (!ev_out.empty()) write_json(ev_out, j);
      out << std::fixed << std::setprecision(2) << "accuracy " << 100 * r.accuracy << "%  precision "
          << 100 * r.precision << "%  recall " << 100 * r.recall << "%  f1 " << 100 * r.f1 << "%  (n=" << r.total()
          << ")\n";
    } else if (sub == pr_cmd) {
      Model model = load_model(pr_model);
      FeatureMatrix rows = rows_for_split(load_features_for(pr_features, model.schema), pr_split);
      auto p = predict(model, rows);
      std::ofstream o(pr_out, std::ios::binary);
      if (!o) throw Error("cannot write " + pr_out);
      for (auto& h : repro_header(cmd, common, hash)) o << '#' << h << '\n';
      o << "id,probability,label\n";
      for (std::size_t i = 0; i < rows.rows(); ++i)
        csv::write_row(o, {rows.ids[i], csv::format_double(p.probability[i]), std::to_string(p.label[i])});
      out << "wrote " << rows.rows() << " predictions\n";
    } else if (sub == xp_cmd) {
      Model model = load_model(xp_model);
      FeatureMatrix all = load_features_for(xp_features, model.schema);
      FeatureMatrix explain = rows_for_split(all, xp_split);
      FeatureMatrix background = rows_for_split(all, xp_bg_split);
      std::mt19937_64 g(common.seed);
      auto sample = [&](const FeatureMatrix& m, std::size_t k) {
        if (k == 0 || k >= m.rows()) return m;
        std::vector<std::size_t> idx(m.rows());
        std::iota(idx.begin(), idx.end(), 0);
        fisher_yates(idx.begin(), idx.end(), g);
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return m.subset_rows(idx);
      };
      background = sample(background, xp_bg_size);
      explain = sample(explain, xp_max_rows);
      ShapleyOptions so;
      so.samples_per_feature = xp_samples;
      so.seed = common.seed;
      so.threads = common.threads;
      FeatureAttribution a = shapley_importance(model, background, explain, so);
      {
        std::ofstream o(xp_out, std::ios::binary);
        if (!o) throw Error("cannot write " + xp_out);
        for (auto& h : repro_header(cmd, common, hash)) o << '#' << h << '\n';
        write_attribution_csv(o, a);
      }
      std::ostringstream summary;
      write_attribution_summary(summary, a, 5);
      std::ofstream(xp_out + ".txt", std::ios::binary) << summary.str();
      out << summary.str();
    } else if (sub == cost_cmd) {
      CostBreakdown c = cost_estimate(cost_in);
      out << std::fixed << std::setprecision(2) << "TC    = $" << c.text_cost << '\n'
          << "VC    = $" << c.image_cost << '\n'
          << "TOTAL = $" << c.total << '\n'
          << std::setprecision(5) << "TC/M  = $" << c.text_cost_per_review << '\n';
      if (!cost_out.empty()) {
        json j = repro_json(cmd, common, hash);
        j["inputs"] = {{"ic", cost_in.input_tokens}, {"oc", cost_in.output_tokens}, {"m", cost_in.reviews},
                       {"price_in", cost_in.price_in_per_1k}, {"price_out", cost_in.price_out_per_1k},
                       {"price_image", cost_in.price_per_image}};
        j["tc"] = c.text_cost;
        j["vc"] = c.image_cost;
        j["total"] = c.total;
        j["per_review_text_cost"] = c.text_cost_per_review;
        write_json(cost_out, j);
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - stage_start).count();
  log::info(cmd + ": done in " + std::to_string(ms) + " ms");
  return 0;
}

}  // namespace revdetect
