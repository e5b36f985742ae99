// Copyright 2026 The DAPrompt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "daprompt/cli.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include <fmt/format.h>

#include "daprompt/backbone.h"
#include "daprompt/errors.h"
#include "daprompt/evaluation.h"
#include "daprompt/experiment.h"
#include "daprompt/serialization.h"
#include "daprompt/synthetic.h"

namespace daprompt {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kStateFile = "train_state.json";
constexpr const char* kLogFile = "train_log.jsonl";
constexpr const char* kResumeWeights = "resume.bin";
constexpr const char* kBestWeights = "weights.bin";

struct Flags {
  std::string config;
  std::string corpus;
  std::string checkpoint;
  std::string out;
  std::string grid = "0:2:0.1";
  std::string scope = "all";
  std::string variant;
  std::string rule = "joint";
  std::string format = "csv";
  std::string split = "all";
  std::string backbone;
  std::vector<std::string> variants;
  std::vector<int> folds;
  double rho = 0.6;
  double rho1 = 0.3;
  double rho2 = 0.3;
  std::uint64_t seed = 0;
  int steps = 200;
  int documents = 200;
  int topics = 12;
  bool resume = false;

  CLI::Option* rho_opt = nullptr;
  CLI::Option* rho1_opt = nullptr;
  CLI::Option* rho2_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path RequirePath(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
  return value;
}

TrainingConfig LoadConfig(const Flags& flags) {
  nlohmann::json j = nlohmann::json::object();
  if (!flags.config.empty()) {
    try {
      j = nlohmann::json::parse(ReadTextFile(flags.config));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(flags.config + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    if (j.is_object() && j.contains("corpus") && j["corpus"].is_string()) {
      // Relative corpus paths are taken relative to the config file.
      const fs::path p = j["corpus"].get<std::string>();
      if (!p.empty() && p.is_relative()) {
        j["corpus"] = (fs::path(flags.config).parent_path() / p).string();
      }
    }
  }
  if (!flags.backbone.empty()) j["backbone_name"] = flags.backbone;
  if (!flags.corpus.empty()) j["corpus"] = flags.corpus;
  if (!flags.variant.empty()) j["variant"] = flags.variant;
  if (flags.scope != "all") j["scope"] = flags.scope;
  if (flags.seed_opt && flags.seed_opt->count()) j["seed"] = flags.seed;
  if (flags.rho_opt && flags.rho_opt->count()) {
    j["rho"] = flags.rho;
    j["select_rho"] = false;
  }
  return ConfigFromJson(j);
}

Corpus LoadConfigCorpus(const TrainingConfig& config) {
  if (config.corpus.empty()) throw ConfigError("no corpus given (--corpus)");
  return LoadCorpus(config.corpus);
}

FoldPlan PlanFor(const Corpus& corpus, const TrainingConfig& config) {
  if (config.fold_scheme == "esc") return PlanFoldsEsc(corpus);
  if (config.fold_scheme == "ctb") return PlanFoldsCtb(corpus, config.seed);
  throw ConfigError("fold_scheme none has no fold plan");
}

Backbone BackboneFor(const TrainingConfig& config, const Corpus& corpus) {
  PretrainOptions pre;
  pre.steps = config.pretrain_steps;
  pre.learning_rate = config.pretrain_learning_rate;
  pre.seed = config.seed;
  return ResolveBackbone(config.backbone_name, corpus, config.seed, pre);
}

// Train and dev pairs of the configured fold.
TrainData SplitFor(const Corpus& corpus, const TrainingConfig& config) {
  TrainData data;
  data.corpus = &corpus;
  if (config.fold_scheme == "none") {
    data.train = EnumeratePairs(corpus);
    return data;
  }
  const FoldPlan plan = PlanFor(corpus, config);
  if (config.fold >= static_cast<int>(plan.folds.size())) {
    throw ConfigError(fmt::format("fold {} out of range; plan has {} folds",
                                  config.fold, plan.folds.size()));
  }
  data.train = EnumeratePairs(corpus, plan.folds[config.fold].train_units, plan.unit);
  if (!plan.dev_units.empty() && config.select_rho) {
    data.dev = EnumeratePairs(corpus, plan.dev_units, plan.unit);
  }
  return data;
}

std::vector<EventPair> EvalPairs(const Corpus& corpus, const std::string& split,
                                 const nlohmann::json& manifest) {
  if (split == "all") return EnumeratePairs(corpus);
  if (!manifest.contains("config")) {
    throw ConfigError("checkpoint manifest has no training config");
  }
  const TrainingConfig config = ConfigFromJson(manifest.at("config"));
  if (config.fold_scheme == "none") {
    throw ConfigError("checkpoint was trained without a fold plan");
  }
  const FoldPlan plan = PlanFor(corpus, config);
  if (config.fold >= static_cast<int>(plan.folds.size())) {
    throw ConfigError("checkpoint fold is out of range for this corpus");
  }
  if (split == "test") {
    return EnumeratePairs(corpus, plan.folds[config.fold].test_units, plan.unit);
  }
  return EnumeratePairs(corpus, plan.dev_units, plan.unit);
}

nlohmann::json CheckpointFields(const DaPromptModel& model) {
  return {{"backbone_name", model.backbone_name()},
          {"vocab_size", model.vocabulary().size},
          {"variant", VariantToJson(model.variant())},
          {"seed", model.seed()},
          {"schema_version", kSchemaVersion}};
}

DecisionRule RuleFromFlags(const Flags& flags) {
  const bool individual = (flags.rho1_opt && flags.rho1_opt->count()) ||
                          (flags.rho2_opt && flags.rho2_opt->count());
  if (individual) return DecisionRule::Individual(flags.rho1, flags.rho2);
  return DecisionRule::Joint(flags.rho);
}

nlohmann::json RuleToJson(const DecisionRule& rule) {
  if (rule.mode == RuleMode::kJoint) {
    return {{"mode", "joint"}, {"rho", rule.rho}};
  }
  return {{"mode", "individual"}, {"rho1", rule.rho1}, {"rho2", rule.rho2}};
}

// ---------------------------------------------------------------- commands

int CmdValidate(const Flags& flags) {
  const fs::path path = RequirePath(flags.corpus, "--corpus");
  Corpus corpus;
  try {
    corpus = LoadCorpus(path);
  } catch (const ParseError& e) {
    std::cerr << path.string() << ": " << e.what() << "\n";
    return kExitInvalidData;
  } catch (const IntegrityError& e) {
    std::cerr << path.string() << ": " << e.what() << "\n";
    return kExitInvalidData;
  }
  const CorpusStats s = ComputeStats(corpus);
  std::cout << fmt::format(
      "documents {}\ntopics {}\nsentences {}\nmentions {}\n"
      "pairs intra {} cross {} total {}\n"
      "causal intra {} cross {} total {}\ndistinct mention surfaces {}\n",
      s.documents, s.topics, s.sentences, s.mentions, s.pairs_intra,
      s.pairs_cross, s.pairs_intra + s.pairs_cross, s.causal_intra,
      s.causal_cross, s.causal_intra + s.causal_cross,
      s.distinct_mention_surfaces);
  return kExitOk;
}

int CmdGenerate(const Flags& flags) {
  const fs::path path = RequirePath(flags.out, "--out");
  SyntheticOptions options;
  options.num_documents = flags.documents;
  options.num_topics = flags.topics;
  if (flags.seed_opt->count()) options.seed = flags.seed;
  const Corpus corpus = GenerateSyntheticCorpus(options);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteCorpus(corpus, path);
  std::cout << StatsToJson(ComputeStats(corpus)).dump() << "\n";
  return kExitOk;
}

int CmdPretrain(const Flags& flags) {
  const fs::path out = RequirePath(flags.out, "--out");
  if (flags.backbone.empty()) throw ConfigError("--backbone is required");
  if (!PresetShape(flags.backbone)) {
    throw ConfigError("unknown backbone preset: " + flags.backbone);
  }
  const fs::path corpus_path = RequirePath(flags.corpus, "--corpus");
  const Corpus corpus = LoadCorpus(corpus_path);
  const std::uint64_t seed = flags.seed_opt->count() ? flags.seed : 1;
  Backbone backbone = CreateBackbone(flags.backbone, CorpusText(corpus), seed);
  PretrainOptions options;
  options.steps = flags.steps;
  options.seed = seed;
  const std::vector<double> losses =
      PretrainMlm(backbone, CorpusText(corpus), options);
  backbone.Save(out);
  std::string log;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    log += nlohmann::json{{"step", i + 1}, {"loss", losses[i]}}.dump() + "\n";
  }
  WriteTextFile(out / "pretrain_log.jsonl", log);
  WriteManifest(out, "pretrain",
                {{"backbone", flags.backbone}, {"steps", flags.steps}},
                corpus_path, seed,
                {{"backbone_name", backbone.name},
                 {"vocab_size", backbone.tokenizer.Size()}});
  if (!losses.empty()) {
    std::cout << fmt::format("pretrained {} steps, loss {:.4f} -> {:.4f}\n",
                             losses.size(), losses.front(), losses.back());
  }
  return kExitOk;
}

int CmdTrain(const Flags& flags) {
  const TrainingConfig config = LoadConfig(flags);
  const fs::path out = RequirePath(flags.out, "--out");
  const Corpus corpus = LoadConfigCorpus(config);
  const TrainData data = SplitFor(corpus, config);

  const bool resuming = flags.resume && fs::exists(out / kStateFile);
  std::optional<DaPromptModel> model;
  std::optional<TrainState> resume_state;
  std::optional<ParameterSnapshot> best;
  if (resuming) {
    resume_state = StateFromJson(nlohmann::json::parse(ReadTextFile(out / kStateFile)));
    model.emplace(DaPromptModel::Load(out, kResumeWeights));
    if (fs::exists(out / kBestWeights)) {
      DaPromptModel best_model = DaPromptModel::Load(out, kBestWeights);
      best.emplace(best_model.Parameters());
    }
  } else {
    model.emplace(DaPromptModel::Create(BackboneFor(config, corpus),
                                        config.variant, config.seed));
  }
  fs::create_directories(out);
  std::ofstream log(out / kLogFile, resuming ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot open " + (out / kLogFile).string());

  TrainHooks hooks;
  hooks.on_step = [&](const TrainState& s, const LossBreakdown& loss) {
    log << nlohmann::json{{"step", s.step},
                          {"epoch", s.epoch + 1},
                          {"L1", loss.l1},
                          {"L2", loss.l2},
                          {"L_total", loss.total}}
               .dump()
        << "\n";
  };
  hooks.on_epoch_end = [&](const TrainState& s, DaPromptModel& m, bool improved) {
    log.flush();
    m.SaveWeights(out, kResumeWeights, true);
    if (improved) m.SaveWeights(out, kBestWeights, false);
    WriteTextFile(out / kStateFile, StateToJson(s).dump(2) + "\n");
    std::cerr << fmt::format("epoch {} step {} loss {:.6f}{}\n", s.epoch, s.step,
                             s.loss_history.empty() ? 0.0 : s.loss_history.back(),
                             s.best_dev_f1 >= 0.0
                                 ? fmt::format(" dev F1 {:.4f}", s.best_dev_f1)
                                 : "");
  };
  const TrainResult result =
      Train(*model, data, config, hooks, resume_state ? &*resume_state : nullptr,
            best ? &*best : nullptr);
  model->SaveWeights(out, kBestWeights, false);
  WriteTextFile(out / kStateFile, StateToJson(result.state).dump(2) + "\n");

  nlohmann::json extra = CheckpointFields(*model);
  extra["selected_rho"] = result.state.rho;
  extra["steps"] = result.state.step;
  extra["epochs"] = result.state.epoch;
  extra["skipped_instances"] = result.skipped_instances;
  WriteManifest(out, "train", ConfigToJson(config), config.corpus, config.seed,
                extra);
  std::cout << fmt::format("trained {} steps over {} epochs; rho {:.2f}\n",
                           result.state.step, result.state.epoch,
                           result.state.rho);
  return kExitOk;
}

int CmdEval(const Flags& flags) {
  const fs::path checkpoint = RequirePath(flags.checkpoint, "--checkpoint");
  const fs::path corpus_path = RequirePath(flags.corpus, "--corpus");
  const ScopeFilter scope = ParseScopeFilter(flags.scope);
  const DecisionRule rule = RuleFromFlags(flags);
  const DaPromptModel model = DaPromptModel::Load(checkpoint, kBestWeights);
  const Corpus corpus = LoadCorpus(corpus_path);
  const nlohmann::json manifest = fs::exists(checkpoint / kManifestFile)
                                      ? ReadManifest(checkpoint)
                                      : nlohmann::json::object();
  const std::vector<EventPair> pairs =
      FilterScope(EvalPairs(corpus, flags.split, manifest), scope);
  const ScopedConfusion c = ScoreByScope(PredictPairs(model, corpus, pairs), rule);
  const std::vector<MetricsReport> reports =
      FilterReports(FoldReports(c, std::nullopt), scope);
  const std::string csv = ReportCsv(reports);
  std::cout << csv;
  if (!flags.out.empty()) {
    const fs::path out = flags.out;
    fs::create_directories(out);
    EmitReport(reports, out / "report.csv", ReportFormat::kCsv);
    EmitReport(reports, out / "report.json", ReportFormat::kJson);
    nlohmann::json extra = CheckpointFields(model);
    extra["rule"] = RuleToJson(rule);
    extra["checkpoint"] = checkpoint.string();
    WriteManifest(out, "eval",
                  {{"scope", flags.scope}, {"split", flags.split},
                   {"rule", RuleToJson(rule)}},
                  corpus_path, model.seed(), extra);
  }
  return kExitOk;
}

int CmdSweep(const Flags& flags) {
  const fs::path checkpoint = RequirePath(flags.checkpoint, "--checkpoint");
  const fs::path corpus_path = RequirePath(flags.corpus, "--corpus");
  const ScopeFilter scope = ParseScopeFilter(flags.scope);
  if (flags.rule != "joint" && flags.rule != "individual") {
    throw ConfigError("--rule must be joint or individual");
  }
  const std::vector<double> grid = ParseGrid(flags.grid);
  const DaPromptModel model = DaPromptModel::Load(checkpoint, kBestWeights);
  const Corpus corpus = LoadCorpus(corpus_path);
  const nlohmann::json manifest = fs::exists(checkpoint / kManifestFile)
                                      ? ReadManifest(checkpoint)
                                      : nlohmann::json::object();
  const std::vector<ScoredPair> preds = PredictPairs(
      model, corpus, FilterScope(EvalPairs(corpus, flags.split, manifest), scope));
  const RuleFamily family =
      flags.rule == "joint" ? RuleFamily::kJoint : RuleFamily::kIndividualEqual;
  const std::vector<SweepPoint> points = Sweep(preds, family, grid, scope);
  const std::string csv = SweepCsv(points, scope);
  std::cout << csv;

  // Individual acceptance at (t/2, t/2) must imply joint acceptance at t.
  std::string containment = "threshold,individual_accepted,joint_accepted,violations\n";
  std::size_t violations = 0;
  for (double t : grid) {
    std::size_t ind = 0, joint = 0, bad = 0;
    for (const ScoredPair& p : preds) {
      const bool a = Decide(p, RuleAt(RuleFamily::kIndividualEqual, t)) == Verdict::kAccept;
      const bool b = Decide(p, RuleAt(RuleFamily::kJoint, t)) == Verdict::kAccept;
      ind += a;
      joint += b;
      bad += a && !b;
    }
    violations += bad;
    containment += fmt::format("{:.2f},{},{},{}\n", t, ind, joint, bad);
  }
  std::cerr << "containment violations: " << violations << "\n";

  if (!flags.out.empty()) {
    const fs::path out = flags.out;
    fs::create_directories(out);
    WriteTextFile(out / "sweep.csv", csv);
    WriteTextFile(out / "containment.csv", containment);
    nlohmann::json extra = CheckpointFields(model);
    extra["containment_violations"] = violations;
    WriteManifest(out, "sweep",
                  {{"grid", flags.grid}, {"rule", flags.rule},
                   {"scope", flags.scope}, {"split", flags.split}},
                  corpus_path, model.seed(), extra);
  }
  return violations == 0 ? kExitOk : kExitFailure;
}

CrossValidationOptions ProgressOptions(const Flags& flags) {
  CrossValidationOptions options;
  options.only_folds = flags.folds;
  options.progress = [](const std::string& msg) { std::cerr << msg << "\n"; };
  return options;
}

int CmdCrossval(const Flags& flags) {
  const TrainingConfig config = LoadConfig(flags);
  const Corpus corpus = LoadConfigCorpus(config);
  const FoldPlan plan = PlanFor(corpus, config);
  const Backbone backbone = BackboneFor(config, corpus);
  const CrossValidationResult result =
      CrossValidate(corpus, plan, config, backbone, ProgressOptions(flags));
  const std::vector<MetricsReport> reports =
      FilterReports(result.reports, config.scope);
  std::cout << ReportCsv(reports);
  if (!flags.out.empty()) {
    const fs::path out = flags.out;
    fs::create_directories(out);
    EmitReport(reports, out / "report.csv", ReportFormat::kCsv);
    EmitReport(reports, out / "report.json", ReportFormat::kJson);
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : result.folds) {
      folds.push_back({{"fold", f.fold_id},
                       {"rho", f.rho},
                       {"epochs", f.state.epoch},
                       {"best_dev_f1", f.state.best_dev_f1}});
    }
    WriteManifest(out, "crossval", ConfigToJson(config), config.corpus,
                  config.seed,
                  {{"folds", folds}, {"backbone_name", config.backbone_name}});
  }
  return kExitOk;
}

int CmdAblate(const Flags& flags) {
  const TrainingConfig config = LoadConfig(flags);
  const Corpus corpus = LoadConfigCorpus(config);
  const FoldPlan plan = PlanFor(corpus, config);
  std::vector<VariantConfig> variants;
  for (const auto& name : flags.variants) {
    variants.push_back(VariantConfig::FromName(name));
  }
  if (variants.empty()) variants = DefaultAblationVariants();
  const Backbone backbone = BackboneFor(config, corpus);
  const std::vector<AblationRow> rows =
      RunAblation(corpus, plan, config, backbone, variants, ProgressOptions(flags));
  const std::string csv = AblationCsv(rows);
  std::cout << csv;
  if (!flags.out.empty()) {
    const fs::path out = flags.out;
    fs::create_directories(out);
    WriteTextFile(out / "ablation.csv", csv);
    nlohmann::json names = nlohmann::json::array();
    for (const auto& v : variants) names.push_back(VariantToJson(v));
    WriteManifest(out, "ablate", ConfigToJson(config), config.corpus,
                  config.seed,
                  {{"variants", names}, {"backbone_name", config.backbone_name}});
  }
  return kExitOk;
}

}  // namespace

void WriteManifest(const fs::path& dir, const std::string& command,
                   const nlohmann::json& config, const fs::path& corpus_path,
                   std::uint64_t seed, const nlohmann::json& extra) {
  nlohmann::json m = {{"command", command},
                      {"code_version", kVersion},
                      {"schema_version", kSchemaVersion},
                      {"created_at", UtcNow()},
                      {"config", config},
                      {"seed", seed}};
  m["corpus"] = {{"path", corpus_path.string()},
                 {"sha256", corpus_path.empty() || !fs::exists(corpus_path)
                                ? ""
                                : Sha256File(corpus_path)}};
  for (const auto& [key, value] : extra.items()) {
    if (!m.contains(key)) m[key] = value;
  }
  fs::create_directories(dir);
  WriteTextFile(dir / kManifestFile, m.dump(2) + "\n");
}

nlohmann::json ReadManifest(const fs::path& dir) {
  try {
    return nlohmann::json::parse(ReadTextFile(dir / kManifestFile));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, (dir / kManifestFile).string() + ": " + e.what());
  }
}

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Event causality identification with assumption prompts"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags flags;

  auto add_corpus = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", flags.corpus, "Corpus JSONL file");
  };
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "Training config JSON");
    cmd->add_option("--backbone", flags.backbone, "Backbone name override");
    cmd->add_option("--variant", flags.variant, "full, sim, shm, et or prompt");
    cmd->add_option("--scope", flags.scope, "intra, cross or all")
        ->check(CLI::IsMember({"intra", "cross", "all"}));
    flags.rho_opt = cmd->add_option("--rho", flags.rho, "Fixed joint threshold");
    flags.seed_opt = cmd->add_option("--seed", flags.seed, "Random seed");
    cmd->add_option("--out", flags.out, "Output directory");
    add_corpus(cmd);
  };

  auto* validate = app.add_subcommand("validate", "Check a corpus and print counts");
  add_corpus(validate);

  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus");
  generate->add_option("--out", flags.out, "Output JSONL file");
  generate->add_option("--documents", flags.documents, "Number of documents");
  generate->add_option("--topics", flags.topics, "Number of topics");
  auto* generate_seed = generate->add_option("--seed", flags.seed, "Random seed");

  auto* pretrain = app.add_subcommand("pretrain", "MLM pre-train a preset backbone");
  add_corpus(pretrain);
  pretrain->add_option("--backbone", flags.backbone, "Preset name");
  pretrain->add_option("--steps", flags.steps, "Pre-training steps");
  pretrain->add_option("--out", flags.out, "Output directory");
  auto* pretrain_seed = pretrain->add_option("--seed", flags.seed, "Random seed");

  auto* train = app.add_subcommand("train", "Fine-tune on one fold");
  add_config(train);
  train->add_flag("--resume", flags.resume, "Continue a run in --out");
  auto* train_rho = flags.rho_opt;
  auto* train_seed = flags.seed_opt;

  auto add_eval = [&](CLI::App* cmd) {
    cmd->add_option("--checkpoint", flags.checkpoint, "Checkpoint directory");
    add_corpus(cmd);
    cmd->add_option("--scope", flags.scope, "intra, cross or all")
        ->check(CLI::IsMember({"intra", "cross", "all"}));
    cmd->add_option("--split", flags.split,
                    "all pairs, or the checkpoint fold's test or dev units")
        ->check(CLI::IsMember({"all", "test", "dev"}));
    cmd->add_option("--out", flags.out, "Output directory");
  };
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a corpus");
  add_eval(eval);
  auto* eval_rho = eval->add_option("--rho", flags.rho, "Joint threshold");
  auto* eval_rho1 = eval->add_option("--rho1", flags.rho1, "Individual threshold 1");
  auto* eval_rho2 = eval->add_option("--rho2", flags.rho2, "Individual threshold 2");
  eval_rho->excludes(eval_rho1)->excludes(eval_rho2);

  auto* sweep = app.add_subcommand("sweep", "Metrics across a threshold grid");
  add_eval(sweep);
  sweep->add_option("--grid", flags.grid, "lo:hi:step or a comma list");
  sweep->add_option("--rule", flags.rule, "joint or individual");

  auto* crossval = app.add_subcommand("crossval", "K-fold cross-validation");
  add_config(crossval);
  crossval->add_option("--fold", flags.folds, "Run only these folds");
  auto* crossval_rho = flags.rho_opt;
  auto* crossval_seed = flags.seed_opt;

  auto* ablate = app.add_subcommand("ablate", "Cross-validate every variant");
  add_config(ablate);
  ablate->add_option("--variants", flags.variants, "Variants to run");
  ablate->add_option("--fold", flags.folds, "Run only these folds");
  auto* ablate_rho = flags.rho_opt;
  auto* ablate_seed = flags.seed_opt;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*validate) return CmdValidate(flags);
    if (*generate) {
      flags.seed_opt = generate_seed;
      return CmdGenerate(flags);
    }
    if (*pretrain) {
      flags.seed_opt = pretrain_seed;
      return CmdPretrain(flags);
    }
    if (*train) {
      flags.rho_opt = train_rho;
      flags.seed_opt = train_seed;
      return CmdTrain(flags);
    }
    if (*eval) {
      flags.rho_opt = eval_rho;
      flags.rho1_opt = eval_rho1;
      flags.rho2_opt = eval_rho2;
      return CmdEval(flags);
    }
    if (*sweep) return CmdSweep(flags);
    if (*crossval) {
      flags.rho_opt = crossval_rho;
      flags.seed_opt = crossval_seed;
      return CmdCrossval(flags);
    }
    if (*ablate) {
      flags.rho_opt = ablate_rho;
      flags.seed_opt = ablate_seed;
      return CmdAblate(flags);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInvalidData;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kExitInvalidData;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace daprompt
