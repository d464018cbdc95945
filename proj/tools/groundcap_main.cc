// Copyright 2026 The Groundcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// groundcap: command-line entry point.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "groundcap/analysis/analysis.h"
#include "groundcap/annotate/annotator.h"
#include "groundcap/chair/chair.h"
#include "groundcap/classifier/train.h"
#include "groundcap/common/assets.h"
#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"
#include "groundcap/common/random.h"
#include "groundcap/decode/decoder.h"
#include "groundcap/fusion/fusion.h"
#include "groundcap/protocol/conformance.h"
#include "groundcap/protocol/server.h"
#include "groundcap/protocol/transport.h"
#include "groundcap/store/config.h"
#include "groundcap/store/manifest.h"
#include "groundcap/store/pipeline.h"

namespace groundcap {
namespace {

namespace fs = std::filesystem;
using store::RunManifest;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Options shared by every subcommand plus the config section that backs
// flags left off the command line. Precedence: flag, HALU_ variable, config
// file, built-in default.
class Command {
 public:
  Command(CLI::App& parent, std::string name, std::string description)
      : name_(std::move(name)), app_(parent.add_subcommand(name_, std::move(description))) {
    app_->add_option("--config", config_path_, "TOML or JSON config file");
    app_->add_option("--run-dir", run_dir_, "directory for outputs and manifest.json")
        ->default_str("runs/<timestamp>");
    seed_opt_ = app_->add_option("--seed", seed_, "root seed (default: config 'seed' or 0)");
  }

  CLI::App* app() const { return app_; }
  const std::string& name() const { return name_; }

  // Flag backed by config key [<section>].<key>.
  template <typename T>
  CLI::Option* Option(const std::string& flag, T& var, const std::string& key,
                      const std::string& help) {
    auto* opt = app_->add_option(flag, var, help);
    fills_.push_back([this, opt, &var, key](const Json& section) {
      const Json* value = store::FindKey(section, key);
      if (opt->count() > 0 || value == nullptr) return;
      try {
        var = value->get<T>();
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kConfiguration,
                    "config key " + name_ + "." + key + ": " + e.what());
      }
    });
    return opt;
  }

  CLI::Option* Flag(const std::string& flag, bool& var, const std::string& key,
                    const std::string& help) {
    auto* opt = app_->add_flag(flag, var, help);
    fills_.push_back([opt, &var, key](const Json& section) {
      const Json* value = store::FindKey(section, key);
      if (opt->count() == 0 && value != nullptr && value->is_boolean()) {
        var = value->get<bool>();
      }
    });
    return opt;
  }

  // Loads the config, applies HALU_ overrides and fills unset flags from
  // the section named `section` (the subcommand name by default).
  void Resolve(const std::string& section = {}) {
    if (!config_path_.empty()) doc_ = store::LoadConfig(config_path_);
    store::ApplyEnvOverrides(doc_, store::HaluEnvironment());
    const std::string key = section.empty() ? name_ : section;
    const Json none = Json::object();
    const Json* found = store::FindKey(doc_, key);
    const Json& s = found != nullptr && found->is_object() ? *found : none;
    for (auto& fill : fills_) fill(s);
    if (seed_opt_->count() == 0) seed_ = store::RootSeed(doc_);
  }

  const Json& doc() const { return doc_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& config_path() const { return config_path_; }

  fs::path RunDir() {
    if (run_dir_.empty()) run_dir_ = store::NewRunDirectory("runs").string();
    fs::create_directories(run_dir_);
    return run_dir_;
  }

  // Output path: the flag value when given, else <run-dir>/<fallback>.
  fs::path Output(const std::string& flag_value, const std::string& fallback) {
    fs::path p = flag_value.empty() ? RunDir() / fallback : fs::path(flag_value);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  std::unique_ptr<RunManifest> StartManifest(const std::vector<std::string>& argv) {
    auto m = std::make_unique<RunManifest>(RunDir() / "manifest.json", name_);
    m->set_argv(argv);
    Json snapshot = doc_;
    snapshot["seed"] = seed_;
    m->set_config(snapshot);
    m->SetSeed("root", seed_);
    if (!config_path_.empty()) m->AddInput(config_path_);
    return m;
  }

 private:
  std::string name_;
  CLI::App* app_;
  std::string config_path_;
  std::string run_dir_;
  std::uint64_t seed_ = 0;
  CLI::Option* seed_opt_ = nullptr;
  Json doc_ = Json::object();
  std::vector<std::function<void(const Json&)>> fills_;
};

void Require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorCode::kUsage, flag + " is required");
}

void AddBackendInput(RunManifest& m, const std::string& target) {
  if (target.starts_with("mock:")) m.AddInput(target.substr(5));
}

std::vector<Json> ReadInputJsonl(RunManifest& m, const fs::path& path) {
  m.AddInput(path);
  return ReadJsonl(path);
}

std::vector<annotate::AnnotatedCaption> ReadAnnotated(RunManifest& m, const fs::path& path) {
  std::vector<annotate::AnnotatedCaption> out;
  for (const auto& j : ReadInputJsonl(m, path)) out.push_back(annotate::AnnotatedFromJson(j));
  return out;
}

annotate::Lexicon LoadLexicon(RunManifest& m, const std::string& path) {
  const fs::path p = path.empty() ? AssetPath("object_lexicon.tsv") : fs::path(path);
  m.AddInput(p);
  return annotate::Lexicon::Load(p);
}

// Wraps a subcommand body with manifest bookkeeping.
int RunWithManifest(RunManifest& m, const std::function<int()>& body) {
  m.Begin();
  try {
    const int code = body();
    m.Finalize();
    return code;
  } catch (const std::exception& e) {
    m.Fail(e);
    throw;
  }
}

}  // namespace

int Main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("groundcap"));
  const std::vector<std::string> args(argv, argv + argc);

  CLI::App app{"Grounded captioning toolkit: annotation, hallucination classifier, "
               "sentence-level decoding and evaluation."};
  app.require_subcommand(1);
  app.set_version_flag("--version", store::kVersion);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  std::function<int()> action;

  // serve-mock
  Command serve(app, "serve-mock", "serve the mock backend over stdio or a Unix socket");
  std::string socket_path;
  std::size_t max_connections = 0;
  serve.Option("--socket", socket_path, "socket", "Unix socket path (default: stdio)");
  serve.Option("--max-connections", max_connections, "max_connections",
               "stop after this many connections (0 = no limit)");
  serve.app()->callback([&] {
    action = [&] {
      serve.Resolve();
      Require(serve.config_path(), "--config");
      auto mock = store::LoadMock(serve.config_path());
      ProtocolServer server(*mock);
      if (socket_path.empty()) {
        spdlog::info("serving {} scenes on stdio", mock->scenes().size());
        FdLineChannel channel(0, 1);
        server.Serve(channel);
      } else {
        spdlog::info("serving {} scenes on {}", mock->scenes().size(), socket_path);
        server.ServeUnixSocket(socket_path, max_connections);
      }
      return kExitOk;
    };
  });

  // conformance
  Command conf(app, "conformance", "run the protocol conformance suite against a backend");
  std::string conf_backend, conf_image, conf_probe = "dog";
  conf.Option("--backend", conf_backend, "backend", "backend target");
  conf.Option("--image", conf_image, "image", "image reference used by the checks");
  conf.Option("--probe-object", conf_probe, "probe_object", "object for the existence query");
  conf.app()->callback([&] {
    action = [&] {
      conf.Resolve();
      Require(conf_backend, "--backend");
      Require(conf_image, "--image");
      auto backend = store::OpenBackend(conf_backend);
      bool ok = true;
      for (const auto& c : RunConformanceSuite(*backend, {conf_image, conf_probe, 24})) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) std::cout << ": " << c.detail;
        std::cout << "\n";
        ok = ok && c.passed;
      }
      return ok ? kExitOk : kExitRuntime;
    };
  });

  // caption
  Command cap(app, "caption", "plain greedy captions from a backend");
  std::string cap_backend, cap_out, cap_prompt = kCaptionPrompt;
  std::vector<std::string> cap_images;
  cap.Option("--backend", cap_backend, "backend", "backend target");
  cap.Option("--image", cap_images, "images", "image reference (repeatable)");
  cap.Option("--prompt", cap_prompt, "prompt", "caption prompt");
  cap.Option("--out", cap_out, "out", "captions JSONL");
  cap.app()->callback([&] {
    action = [&] {
      cap.Resolve();
      Require(cap_backend, "--backend");
      if (cap_images.empty()) throw Error(ErrorCode::kUsage, "--image is required");
      auto m = cap.StartManifest(args);
      AddBackendInput(*m, cap_backend);
      return RunWithManifest(*m, [&] {
        auto backend = store::OpenBackend(cap_backend);
        const Vocabulary vocab(backend->Info());
        std::vector<Json> docs;
        for (const auto& image : cap_images) {
          auto ids = PlainGreedyDecode(*backend, {image, cap_prompt, {}}).tokens;
          std::erase(ids, vocab.eos_id());
          annotate::CaptionRecord r{image, image, vocab.Detokenize(ids), ids, {}};
          docs.push_back(annotate::CaptionRecordToJson(r));
        }
        const auto out = cap.Output(cap_out, "captions.jsonl");
        WriteFile(out, ToJsonl(docs));
        m->AddOutput(out);
        return kExitOk;
      });
    };
  });

  // annotate
  Command ann(app, "annotate", "label caption tokens ACCURATE/INACCURATE");
  std::string ann_captions, ann_scores, ann_model, ann_lexicon, ann_backend, ann_out;
  double ann_threshold = 0.5;
  ann.Option("--captions", ann_captions, "captions", "caption records JSONL");
  ann.Option("--scores", ann_scores, "scores", "detector score records JSONL");
  ann.Option("--fusion-model", ann_model, "fusion_model", "fusion model JSON (default: shipped)");
  ann.Option("--threshold", ann_threshold, "threshold", "existence threshold");
  ann.Option("--lexicon", ann_lexicon, "lexicon", "object lexicon TSV (default: shipped)");
  ann.Option("--backend", ann_backend, "backend",
             "backend target supplying the vocabulary for token ids");
  ann.Option("--out", ann_out, "out", "annotated captions JSONL");
  ann.app()->callback([&] {
    action = [&] {
      ann.Resolve();
      Require(ann_captions, "--captions");
      Require(ann_scores, "--scores");
      auto m = ann.StartManifest(args);
      if (!ann_backend.empty()) AddBackendInput(*m, ann_backend);
      return RunWithManifest(*m, [&] {
        std::vector<annotate::CaptionRecord> records;
        for (const auto& j : ReadInputJsonl(*m, ann_captions)) {
          records.push_back(annotate::CaptionRecordFromJson(j));
        }
        m->AddInput(ann_scores);
        const auto scores = fusion::ReadScoreRecords(ann_scores);
        fusion::FusionModel model = fusion::FusionModel::Default();
        if (!ann_model.empty()) {
          m->AddInput(ann_model);
          model = fusion::LoadModel(ann_model);
        }
        annotate::LexiconExtractor extractor(LoadLexicon(*m, ann_lexicon));
        std::unique_ptr<Backend> backend;
        std::optional<Vocabulary> vocab;
        if (!ann_backend.empty()) {
          backend = store::OpenBackend(ann_backend);
          vocab.emplace(backend->Info());
        }
        const auto corpus = annotate::AnnotateCorpus(records, extractor,
                                                     vocab ? &*vocab : nullptr, model, scores,
                                                     {ann_threshold});
        std::vector<Json> docs;
        for (const auto& c : corpus.captions) docs.push_back(annotate::AnnotatedToJson(c));
        const auto out = ann.Output(ann_out, "annotated.jsonl");
        WriteFile(out, ToJsonl(docs));
        m->AddOutput(out);
        m->SetResult("summary", annotate::SummaryToJson(corpus.summary));
        std::cout << annotate::SummaryToJson(corpus.summary).dump() << "\n";
        return kExitOk;
      });
    };
  });

  // train-fusion
  Command tf(app, "train-fusion", "fit the detector-fusion logistic model");
  std::string tf_scores, tf_out;
  int tf_folds = 5;
  bool tf_downsample = false;
  double tf_threshold = 0.5;
  tf.Option("--scores", tf_scores, "scores", "labeled detector score records JSONL");
  tf.Option("--folds", tf_folds, "folds", "cross-validation folds");
  tf.Flag("--downsample", tf_downsample, "downsample", "balance classes before fitting");
  tf.Option("--threshold", tf_threshold, "threshold", "decision threshold for CV metrics");
  tf.Option("--out", tf_out, "out", "model JSON");
  tf.app()->callback([&] {
    action = [&] {
      tf.Resolve();
      Require(tf_scores, "--scores");
      auto m = tf.StartManifest(args);
      return RunWithManifest(*m, [&] {
        m->AddInput(tf_scores);
        const auto records = fusion::ReadScoreRecords(tf_scores);
        fusion::TrainOptions opts;
        opts.folds = tf_folds;
        opts.downsample = tf_downsample;
        opts.seed = SeedFrom(tf.seed(), HashString("fusion"));
        opts.threshold = tf_threshold;
        m->SetSeed("fusion", opts.seed);
        const auto report = fusion::TrainFusion(records, opts);
        auto ms = [](const fusion::MeanStd& v) { return Json{{"mean", v.mean}, {"std", v.std}}; };
        const Json cv = {{"folds", opts.folds},
                         {"accuracy", ms(report.accuracy)},
                         {"precision", ms(report.precision)},
                         {"recall", ms(report.recall)},
                         {"positives", report.positives},
                         {"negatives", report.negatives},
                         {"skipped", report.skipped},
                         {"converged", report.final_fit.converged}};
        const auto out = tf.Output(tf_out, "fusion_model.json");
        fusion::SaveModel(out, report.model, {{"cv", cv}});
        m->AddOutput(out);
        m->SetResult("cv", cv);
        std::cout << fusion::ModelToJson(report.model, {{"cv", cv}}).dump(2) << "\n";
        return kExitOk;
      });
    };
  });

  // build-features
  Command bf(app, "build-features", "hidden-state features for annotated captions");
  std::string bf_annotated, bf_backend, bf_mode = "DIFF", bf_prompt = kCaptionPrompt, bf_out;
  bf.Option("--annotated", bf_annotated, "annotated", "annotated captions JSONL");
  bf.Option("--backend", bf_backend, "backend", "backend target");
  bf.Option("--mode", bf_mode, "feature_mode", "X1_ONLY | X2_ONLY | DIFF");
  bf.Option("--prompt", bf_prompt, "prompt", "caption prompt");
  bf.Option("--out", bf_out, "out", "feature dataset (HSD1)");
  bf.app()->callback([&] {
    action = [&] {
      bf.Resolve();
      Require(bf_annotated, "--annotated");
      Require(bf_backend, "--backend");
      const auto mode = classifier::ParseFeatureMode(bf_mode);
      auto m = bf.StartManifest(args);
      AddBackendInput(*m, bf_backend);
      return RunWithManifest(*m, [&] {
        const auto captions = ReadAnnotated(*m, bf_annotated);
        auto backend = store::OpenBackend(bf_backend);
        const auto data = classifier::BuildFeatures(
            store::CollectHiddenStates(*backend, captions, bf_prompt), mode);
        const auto out = bf.Output(bf_out, "features.hsd");
        classifier::WriteHsd(out, data);
        m->AddOutput(out);
        m->SetResult("rows", data.labels.size());
        m->SetResult("dim", data.dim);
        m->SetResult("feature_mode", std::string(classifier::FeatureModeName(mode)));
        return kExitOk;
      });
    };
  });

  // train-classifier
  Command tc(app, "train-classifier", "train the token hallucination classifier ensemble");
  std::string tc_features, tc_mode = "DIFF", tc_out;
  std::size_t tc_epochs = 40, tc_folds = 5, tc_batch = 512;
  double tc_lr = 1e-3, tc_wd = 1e-5;
  tc.Option("--features", tc_features, "features", "feature dataset (HSD1)");
  tc.Option("--mode", tc_mode, "feature_mode", "feature mode the dataset was built with");
  tc.Option("--epochs", tc_epochs, "epochs", "epochs per fold");
  tc.Option("--folds", tc_folds, "folds", "folds (ensemble members)");
  tc.Option("--batch", tc_batch, "batch", "batch size");
  tc.Option("--lr", tc_lr, "lr", "initial learning rate");
  tc.Option("--weight-decay", tc_wd, "weight_decay", "AdamW weight decay");
  tc.Option("--out", tc_out, "out", "classifier JSON");
  tc.app()->callback([&] {
    action = [&] {
      tc.Resolve("classifier");
      Require(tc_features, "--features");
      const auto mode = classifier::ParseFeatureMode(tc_mode);
      const Json none = Json::object();
      const Json& section = tc.doc().contains("classifier") ? tc.doc()["classifier"] : none;
      auto config = classifier::TrainConfig::FromJson(section);
      config.epochs = tc_epochs;
      config.folds = tc_folds;
      config.batch = tc_batch;
      config.lr = tc_lr;
      config.weight_decay = tc_wd;
      if (!section.contains("seed")) config.seed = SeedFrom(tc.seed(), HashString("classifier"));
      config.Validate();
      auto m = tc.StartManifest(args);
      m->SetSeed("classifier", config.seed);
      return RunWithManifest(*m, [&] {
        m->AddInput(tc_features);
        const auto data = classifier::ReadHsd(tc_features);
        const auto trained = classifier::Train(data, config);
        const auto out = tc.Output(tc_out, "classifier.json");
        WriteJsonFile(out, {{"feature_mode", std::string(classifier::FeatureModeName(mode))},
                            {"train_config", config.ToJson()},
                            {"ensemble", trained.ensemble.ToJson()}});
        m->AddOutput(out);
        const auto history = tc.RunDir() / "history.json";
        WriteJsonFile(history, classifier::HistoryToJson(trained.history));
        m->AddOutput(history);
        const Json metrics = {{"test", classifier::EvalToJson(trained.test)},
                              {"majority", classifier::EvalToJson(trained.majority)}};
        const auto metrics_path = tc.RunDir() / "metrics.json";
        WriteJsonFile(metrics_path, metrics);
        m->AddOutput(metrics_path);
        m->SetResult("metrics", metrics);
        std::cout << classifier::FormatTableRow("Majority", trained.majority) << "\n"
                  << classifier::FormatTableRow(classifier::FeatureModeName(mode), trained.test)
                  << "\n";
        return kExitOk;
      });
    };
  });

  // decode
  Command dec(app, "decode", "sentence-level decoding with classifier-guided selection");
  std::string dec_image, dec_backend, dec_classifier, dec_out;
  decode::DecodeConfig dcfg;
  dec.Option("--image", dec_image, "image", "image reference");
  dec.Option("--backend", dec_backend, "backend", "backend target");
  dec.Option("--classifier", dec_classifier, "classifier",
             "classifier JSON, or constant:accurate / constant:inaccurate");
  dec.Option("--K", dcfg.k, "K", "candidates per sentence");
  dec.Option("--t", dcfg.t, "t", "sentence retention threshold");
  dec.Option("--max-total-tokens", dcfg.max_total_tokens, "max_total_tokens", "length cap");
  dec.Option("--prompt", dcfg.prompt, "prompt", "caption prompt");
  dec.Flag("--break-on-selected-eos", dcfg.break_on_selected_eos, "break_on_selected_eos",
           "stop only when the selected candidate ends the caption");
  dec.Option("--out", dec_out, "out", "DecodeRun JSON");
  dec.app()->callback([&] {
    action = [&] {
      dec.Resolve();
      Require(dec_image, "--image");
      Require(dec_backend, "--backend");
      Require(dec_classifier, "--classifier");
      dcfg.Validate();
      auto m = dec.StartManifest(args);
      AddBackendInput(*m, dec_backend);
      return RunWithManifest(*m, [&] {
        std::unique_ptr<decode::TokenClassifier> cls;
        if (dec_classifier == "constant:accurate" || dec_classifier == "constant:inaccurate") {
          cls = std::make_unique<decode::ConstantClassifier>(dec_classifier == "constant:accurate");
        } else {
          m->AddInput(dec_classifier);
          cls = decode::LoadClassifier(dec_classifier);
        }
        auto backend = store::OpenBackend(dec_backend);
        const auto run = decode::SentenceLevelDecode(*backend, *cls, dec_image, dcfg);
        const auto out = dec.Output(dec_out, "decode_run.json");
        WriteJsonFile(out, run.ToJson());
        m->AddOutput(out);
        std::cout << run.final_caption << "\n";
        return kExitOk;
      });
    };
  });

  // eval-chair
  Command ec(app, "eval-chair", "CHAIR_s, CHAIR_i, recall and length of a caption set");
  std::string ec_captions, ec_gt, ec_synonyms, ec_lexicon, ec_out, ec_name = "captions";
  ec.Option("--captions", ec_captions, "captions", "captions JSONL");
  ec.Option("--gt", ec_gt, "gt", "ground-truth objects JSON");
  ec.Option("--synonyms", ec_synonyms, "synonyms", "synonym TSV (default: shipped)");
  ec.Option("--lexicon", ec_lexicon, "lexicon", "object lexicon TSV (default: shipped)");
  ec.Option("--name", ec_name, "name", "row label");
  ec.Option("--out", ec_out, "out", "report JSON");
  ec.app()->callback([&] {
    action = [&] {
      ec.Resolve();
      Require(ec_captions, "--captions");
      Require(ec_gt, "--gt");
      auto m = ec.StartManifest(args);
      return RunWithManifest(*m, [&] {
        annotate::LexiconExtractor extractor(LoadLexicon(*m, ec_lexicon));
        const auto captions = chair::CaptionsFromJsonl(ReadInputJsonl(*m, ec_captions), extractor);
        m->AddInput(ec_gt);
        const auto gt = chair::GroundTruth::Load(ec_gt);
        const fs::path syn = ec_synonyms.empty() ? AssetPath("chair_synonyms.tsv")
                                                 : fs::path(ec_synonyms);
        m->AddInput(syn);
        const auto result = chair::EvaluateChair(captions, gt, chair::SynonymMap::Load(syn));
        const auto out = ec.Output(ec_out, "chair.json");
        WriteJsonFile(out, result.ToJson());
        m->AddOutput(out);
        std::cout << chair::FormatChairRow(ec_name, result) << "\n";
        if (result.excluded > 0) {
          throw Error(ErrorCode::kInput, std::to_string(result.excluded) +
                                             " caption(s) excluded: image missing from --gt");
        }
        return kExitOk;
      });
    };
  });

  // analyze
  Command an(app, "analyze", "divergence profile, position histogram or consistency study");
  std::string an_mode, an_backend, an_image, an_caption, an_annotated, an_out, an_svg;
  std::string an_prompt = kCaptionPrompt;
  std::size_t an_bins = 10;
  an.Option("--mode", an_mode, "mode", "jsd | positions | consistency")
      ->check(CLI::IsMember({"jsd", "positions", "consistency"}));
  an.Option("--backend", an_backend, "backend", "backend target (jsd, consistency)");
  an.Option("--image", an_image, "image", "image reference (jsd)");
  an.Option("--caption", an_caption, "caption", "caption text (jsd)");
  an.Option("--prompt", an_prompt, "prompt", "caption prompt (jsd)");
  an.Option("--annotated", an_annotated, "annotated",
            "annotated captions JSONL (positions, consistency)");
  an.Option("--bins", an_bins, "bins", "histogram bins (positions)");
  an.Option("--out", an_out, "out", "report JSON");
  an.Option("--svg", an_svg, "svg", "also write an SVG plot (jsd, positions)");
  an.app()->callback([&] {
    action = [&] {
      an.Resolve();
      Require(an_mode, "--mode");
      if (an_mode == "jsd") {
        Require(an_backend, "--backend");
        Require(an_image, "--image");
        Require(an_caption, "--caption");
      } else {
        Require(an_annotated, "--annotated");
        if (an_mode == "consistency") Require(an_backend, "--backend");
      }
      if (!an_svg.empty() && an_mode == "consistency") {
        throw Error(ErrorCode::kUsage, "--svg is available for jsd and positions only");
      }
      auto m = an.StartManifest(args);
      if (!an_backend.empty()) AddBackendInput(*m, an_backend);
      return RunWithManifest(*m, [&] {
        Json report;
        std::string svg;
        if (an_mode == "jsd") {
          auto backend = store::OpenBackend(an_backend);
          const auto ids = Vocabulary(backend->Info()).Tokenize(an_caption);
          const auto profile = analysis::ComputeDivergenceProfile(*backend, an_image, ids, an_prompt);
          report = profile.ToJson();
          svg = analysis::ProfileSvg(profile);
        } else if (an_mode == "positions") {
          const auto h = analysis::ComputePositionHistogram(ReadAnnotated(*m, an_annotated), an_bins);
          report = h.ToJson();
          svg = analysis::HistogramSvg(h);
        } else {
          const auto captions = ReadAnnotated(*m, an_annotated);
          auto backend = store::OpenBackend(an_backend);
          report = analysis::ConsistencyStudy(*backend, captions).ToJson();
        }
        const auto out = an.Output(an_out, an_mode + ".json");
        WriteJsonFile(out, report);
        m->AddOutput(out);
        if (!an_svg.empty()) {
          const auto svg_path = an.Output(an_svg, "");
          WriteFile(svg_path, svg);
          m->AddOutput(svg_path);
        }
        return kExitOk;
      });
    };
  });

  // pipeline
  Command pl(app, "pipeline", "all stages end to end on the mock backend");
  std::string replay;
  pl.app()->add_option("--replay", replay, "rerun from a pipeline manifest and compare outputs");
  pl.app()->callback([&] {
    action = [&] {
      if (!replay.empty()) {
        const auto report = store::ReplayPipeline(replay, pl.RunDir(), args);
        for (const auto& line : report.mismatches) std::cout << "MISMATCH " << line << "\n";
        if (!report.mismatches.empty()) {
          throw Error(ErrorCode::kInput, std::to_string(report.mismatches.size()) +
                                             " output(s) differ from " + replay);
        }
        std::cout << "replay matched " << replay << " in " << report.result.dir.string() << "\n";
        return kExitOk;
      }
      const fs::path config_file =
          pl.config_path().empty() ? AssetPath("pipeline.toml") : fs::path(pl.config_path());
      Json doc = store::LoadConfig(config_file);
      store::ApplyEnvOverrides(doc, store::HaluEnvironment());
      if (pl.app()->get_option("--seed")->count() > 0) doc["seed"] = pl.seed();
      const auto result = store::RunPipeline(doc, pl.RunDir(), args, config_file);
      std::cout << ReadFile(result.dir / "06_chair" / "chair_table.txt");
      std::cout << "run directory: " << result.dir.string() << "\n";
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (auto level = spdlog::level::from_str(log_level);
      level != spdlog::level::off || log_level == "off") {
    spdlog::set_level(level);
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << store::ErrorToJson(e).dump() << "\n";
    const auto* err = dynamic_cast<const Error*>(&e);
    return err && err->code() == ErrorCode::kUsage ? kExitUsage : kExitRuntime;
  }
}

}  // namespace groundcap

int main(int argc, char** argv) { return groundcap::Main(argc, argv); }
