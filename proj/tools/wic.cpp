// wic: command-line entry points for training, prediction, scoring,
// hyperparameter search and dataset mixing.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wic/wic.hpp"

namespace fs = std::filesystem;
using wic::Json;

namespace {

struct UsageError : wic::Error {
  using wic::Error::Error;
};

std::string absolute(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw wic::DataError("cannot create output directory " + dir + ": " + ec.message());
}

std::optional<wic::FieldMapping> mapping_for(wic::DataFormat format, const std::string& mapping_file) {
  if (format == wic::DataFormat::canonical || mapping_file.empty()) return std::nullopt;
  const auto all = wic::load_field_mappings(mapping_file);
  const auto it = all.find(wic::to_string(format));
  if (it == all.end()) return std::nullopt;
  return it->second;
}

std::vector<wic::WicExample> load_split(const std::string& path, wic::DataFormat format,
                                        const std::string& mapping_file,
                                        wic::LoadPolicy policy = wic::LoadPolicy::fail_fast) {
  wic::LoadOptions opt;
  opt.policy = policy;
  opt.mapping = mapping_for(format, mapping_file);
  return wic::load_examples(path, format, opt);
}

// Splits `--a.b value` / `--a.b=value` pairs out of unparsed arguments.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (!arg.starts_with("--") || arg.find('.') == std::string::npos) {
      throw UsageError("unrecognised argument '" + arg + "'");
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw UsageError("override " + arg + " needs a value");
      out.emplace_back(arg.substr(2), extras[++i]);
    }
  }
  return out;
}

struct ResolvedConfig {
  Json json;
  wic::ExperimentConfig config;
  std::vector<std::string> overrides;
};

ResolvedConfig resolve_config(const std::string& path, const std::vector<std::string>& extras,
                              const std::optional<std::uint64_t>& seed, const std::string& out) {
  ResolvedConfig r;
  r.json = wic::load_experiment_json(path);
  for (const auto& [key, value] : parse_overrides(extras)) {
    wic::apply_override(r.json, key, value);
    r.overrides.push_back("--" + key + " " + value);
  }
  if (seed) {
    r.json["train"]["seed"] = *seed;
    r.overrides.push_back("--seed " + std::to_string(*seed));
  }
  if (!out.empty()) {
    r.json["out"] = out;
    r.overrides.push_back("--out " + out);
  }
  for (const char* key : {"main_train", "main_dev", "main_test", "aux_train", "field_mappings"}) {
    r.json["data"][key] = absolute(r.json["data"][key].get<std::string>());
  }
  r.json["encoder"]["precomputed_path"] = absolute(r.json["encoder"]["precomputed_path"].get<std::string>());
  r.config = wic::parse_experiment(r.json);
  return r;
}

struct LoadedData {
  std::vector<wic::WicExample> main_train, aux_train, dev, test;
  std::optional<wic::PrecomputedStore> store;
};

LoadedData load_data(const wic::ExperimentConfig& c) {
  LoadedData d;
  d.main_train = load_split(c.main_train, c.main_format, c.field_mappings, c.load_policy);
  d.dev = load_split(c.main_dev, c.main_format, c.field_mappings, c.load_policy);
  if (!c.main_test.empty()) d.test = load_split(c.main_test, c.main_format, c.field_mappings, c.load_policy);
  if (!c.aux_train.empty() && c.train.mixing.kind != wic::MixKind::No) {
    d.aux_train = load_split(c.aux_train, c.aux_format, c.field_mappings, c.load_policy);
    for (auto& ex : d.aux_train) ex.source = wic::Source::auxiliary;
  }
  if (c.encoder_mode == wic::EncoderMode::precomputed) d.store = wic::load_precomputed(c.precomputed_path);
  return d;
}

std::vector<std::pair<std::string, std::string>> experiment_inputs(const wic::ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> in = {
      {"main_train", c.main_train}, {"main_dev", c.main_dev}, {"main_test", c.main_test}};
  if (c.train.mixing.kind != wic::MixKind::No) in.emplace_back("aux_train", c.aux_train);
  if (c.encoder_mode == wic::EncoderMode::precomputed) in.emplace_back("precomputed", c.precomputed_path);
  if (!c.field_mappings.empty()) in.emplace_back("field_mappings", c.field_mappings);
  return in;
}

// Config recorded inside snapshots: everything that shapes the model, no paths.
Json snapshot_config(const wic::ExperimentConfig& c) {
  Json train;
  wic::to_json(train, c.train);
  return Json{{"encoder_mode", wic::to_string(c.encoder_mode)}, {"train", train}};
}

std::string indent(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    out += text[i];
    if (text[i] == '\n' && i + 1 < text.size()) out += "  ";
  }
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::string paths_report(const wic::PathReports& r, std::size_t best_epoch, wic::OutputPath eval_path) {
  return "{\n  \"eval_path\": \"" + std::string(wic::to_string(eval_path)) + "\",\n  \"best_epoch\": " +
         std::to_string(best_epoch) + ",\n  \"classifier\": " + indent(wic::format_report(r.classifier)) +
         ",\n  \"similarity\": " + indent(wic::format_report(r.similarity)) + "\n}\n";
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& extras,
              const std::optional<std::uint64_t>& seed, const std::string& out_override) {
  const auto r = resolve_config(config_path, extras, seed, out_override);
  const auto& c = r.config;
  const auto data = load_data(c);
  ensure_dir(c.out);
  const fs::path out(c.out);
  wic::write_text((out / "manifest.json").string(),
                  wic::make_manifest("train", r.json, experiment_inputs(c), r.overrides).dump(2) + "\n");

  const wic::PrecomputedStore* store = data.store ? &*data.store : nullptr;
  const auto result = wic::train_model(c.train, data.main_train, data.aux_train, data.dev, store,
                                       [](const wic::EpochRecord& e) {
                                         std::fprintf(stderr,
                                                      "epoch %3zu  loss %.5f (ce %.5f, cos %.5f)  dev F1 "
                                                      "classifier %.4f similarity %.4f\n",
                                                      e.epoch, e.loss_total, e.loss_ce, e.loss_cos,
                                                      e.dev_f1_classifier, e.dev_f1_similarity);
                                       });

  wic::save_snapshot((out / "snapshot.json").string(), result.best, snapshot_config(c));
  wic::write_text((out / "history.tsv").string(), wic::format_history(result.history));

  const auto report_for = [&](const std::vector<wic::WicExample>& split) {
    const auto set = wic::prepare(split, result.best, store, c.train.max_len, c.train.skip_overlong);
    return wic::evaluate_paths(wic::run_inference(result.best, set, c.train.loss), c.train.loss);
  };
  const auto dev = report_for(data.dev);
  wic::write_text((out / "dev_report.json").string(), paths_report(dev, result.history.best_epoch, c.train.eval_path));
  if (!data.test.empty()) {
    const auto test = report_for(data.test);
    wic::write_text((out / "test_report.json").string(),
                    paths_report(test, result.history.best_epoch, c.train.eval_path));
  }
  std::printf("best epoch %zu: dev macro-F1 (%s) = %.6f\n", result.history.best_epoch,
              wic::to_string(c.train.eval_path), result.history.best_dev_f1);
  return 0;
}

int cmd_predict(const std::string& snapshot_path, const std::string& data_path, const std::string& format,
                const std::string& mappings, const std::string& path_name, const std::string& precomputed,
                const std::string& out_path) {
  const auto snap = wic::load_snapshot(snapshot_path);
  const auto train = wic::train_config_from_json(snap.config.at("train"));
  const auto path = path_name.empty() ? train.eval_path : wic::output_path_from_string(path_name);
  const auto examples = load_split(data_path, wic::format_from_string(format), mappings);

  std::optional<wic::PrecomputedStore> store;
  if (snap.model.mode == wic::EncoderMode::precomputed) {
    if (precomputed.empty()) throw UsageError("this snapshot needs --precomputed embeddings");
    store = wic::load_precomputed(precomputed);
  }
  const auto set = wic::prepare(examples, snap.model, store ? &*store : nullptr, train.max_len,
                                /*skip_overlong=*/false);
  std::vector<wic::Prediction> preds;
  for (const auto& s : wic::run_inference(snap.model, set, train.loss)) {
    preds.emplace_back(s.id, wic::predict(s.outputs, path, train.loss));
  }
  wic::write_predictions(out_path, preds);

  Json cfg{{"snapshot", absolute(snapshot_path)}, {"data", absolute(data_path)}, {"format", format},
           {"path", wic::to_string(path)}};
  std::vector<std::pair<std::string, std::string>> inputs{{"snapshot", absolute(snapshot_path)},
                                                          {"data", absolute(data_path)}};
  if (!precomputed.empty()) inputs.emplace_back("precomputed", absolute(precomputed));
  wic::write_text(out_path + ".manifest.json", wic::make_manifest("predict", cfg, inputs).dump(2) + "\n");
  std::printf("wrote %zu predictions (%s path) to %s\n", preds.size(), wic::to_string(path), out_path.c_str());
  return 0;
}

int cmd_score(const std::string& pred_path, const std::string& gold_path, std::string out_path) {
  if (out_path.empty()) out_path = pred_path + ".report.json";
  const auto report = wic::score_files(pred_path, gold_path,
                                       [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
  const auto text = wic::format_report(report);
  std::cout << text;
  wic::write_text(out_path, text);
  Json cfg{{"pred", absolute(pred_path)}, {"gold", absolute(gold_path)}};
  wic::write_text(out_path + ".manifest.json",
                  wic::make_manifest("score", cfg, {{"pred", absolute(pred_path)}, {"gold", absolute(gold_path)}})
                          .dump(2) +
                      "\n");
  return 0;
}

int cmd_tune(const std::string& config_path, const std::vector<std::string>& extras,
             const std::optional<std::uint64_t>& seed, const std::string& out_override, const std::string& space_path,
             std::size_t trials, std::uint64_t search_seed, std::size_t threads) {
  const auto r = resolve_config(config_path, extras, seed, out_override);
  const auto& c = r.config;
  const auto data = load_data(c);
  wic::SearchSpace space = wic::default_search_space(c.encoder_mode);
  if (!space_path.empty()) {
    std::ifstream in(space_path);
    if (!in) throw wic::ConfigError("cannot open search space " + space_path);
    Json j;
    in >> j;
    space = wic::search_space_from_json(j);
  }
  ensure_dir(c.out);
  const fs::path out(c.out);
  Json cfg = r.json;
  cfg["search"] = {{"trials", trials}, {"search_seed", search_seed}, {"space", space_path.empty() ? "default" : absolute(space_path)}};
  auto inputs = experiment_inputs(c);
  if (!space_path.empty()) inputs.emplace_back("space", absolute(space_path));
  wic::write_text((out / "manifest.json").string(), wic::make_manifest("tune", cfg, inputs, r.overrides).dump(2) + "\n");

  wic::SearchOptions opt;
  opt.threads = threads;
  opt.trial_log = (out / "trials.jsonl").string();
  const wic::SearchData sd{&data.main_train, &data.aux_train, &data.dev, data.store ? &*data.store : nullptr};
  const auto result = wic::random_search(space, trials, search_seed, c.train, sd, opt);

  std::string ranking = "rank\ttrial\tbest_dev_f1\n";
  for (std::size_t k = 0; k < result.ranking.size(); ++k) {
    const auto& t = result.trials[result.ranking[k]];
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%.9f\n", k + 1, t.index, t.best_dev_f1);
    ranking += buf;
  }
  wic::write_text((out / "ranking.tsv").string(), ranking);
  std::size_t failed = 0;
  for (const auto& t : result.trials) failed += t.ok ? 0 : 1;
  if (result.ranking.empty()) {
    std::cerr << "error: all " << trials << " trials failed\n";
    return 1;
  }
  const auto& best = result.trials[result.ranking.front()];
  Json best_cfg = r.json;
  Json train;
  wic::to_json(train, best.config);
  best_cfg["mixing"] = train["mixing"];
  best_cfg["loss"] = train["loss"];
  train.erase("mixing");
  train.erase("loss");
  best_cfg["train"] = train;
  wic::write_text((out / "best_config.json").string(), best_cfg.dump(2) + "\n");
  std::printf("best trial %zu: dev macro-F1 %.6f (%zu of %zu trials failed)\n", best.index, best.best_dev_f1, failed,
              trials);
  return 0;
}

int cmd_mix(const std::string& main_path, const std::string& aux_path, const std::string& main_format,
            const std::string& aux_format, const std::string& mappings, const std::string& kind, double ratio,
            std::uint64_t seed, const std::string& out_path) {
  wic::MixingStrategy strategy;
  strategy.kind = wic::mix_kind_from_string(kind);
  strategy.sub_ratio = ratio;
  strategy.seed = seed;
  const auto main = load_split(main_path, wic::format_from_string(main_format), mappings);
  std::vector<wic::WicExample> aux;
  if (strategy.kind != wic::MixKind::No) {
    if (aux_path.empty()) throw UsageError("mixing kind " + kind + " needs --aux");
    aux = load_split(aux_path, wic::format_from_string(aux_format), mappings);
    for (auto& ex : aux) ex.source = wic::Source::auxiliary;
  }
  const auto mixed = wic::mix(main, aux, strategy);
  wic::write_examples(out_path, mixed);
  Json cfg{{"main", absolute(main_path)}, {"aux", absolute(aux_path)},     {"main_format", main_format},
           {"aux_format", aux_format},    {"kind", kind},                  {"sub_ratio", ratio},
           {"seed", seed}};
  std::vector<std::pair<std::string, std::string>> inputs{{"main", absolute(main_path)}};
  if (!aux.empty()) inputs.emplace_back("aux", absolute(aux_path));
  wic::write_text(out_path + ".manifest.json", wic::make_manifest("mix", cfg, inputs).dump(2) + "\n");
  std::printf("wrote %zu examples to %s\n", mixed.size(), out_path.c_str());
  return 0;
}

int cmd_synth(const std::string& out_dir, std::size_t words, std::size_t examples, std::uint64_t seed) {
  const auto corpus = wic::generate_synthetic(words, examples, seed);
  ensure_dir(out_dir);
  const fs::path out(out_dir);
  wic::write_examples((out / "train.jsonl").string(), corpus.train);
  wic::write_examples((out / "dev.jsonl").string(), corpus.dev);
  wic::write_examples((out / "test.jsonl").string(), corpus.test);
  Json cfg{{"words", words}, {"examples", examples}, {"seed", seed}};
  wic::write_text((out / "manifest.json").string(), wic::make_manifest("synth", cfg, {}).dump(2) + "\n");
  std::printf("wrote %zu/%zu/%zu examples to %s\n", corpus.train.size(), corpus.dev.size(), corpus.test.size(),
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-in-context training and evaluation"};
  app.require_subcommand(1);

  std::string config, out, space, snapshot, data, format = "canonical", mappings, path_name, precomputed, pred,
                                                   gold, main_path, aux_path, main_format = "canonical",
                                                   aux_format = "canonical", kind = "No";
  std::optional<std::uint64_t> seed;
  std::uint64_t search_seed = 0, mix_seed = 0, synth_seed = 1;
  std::size_t trials = 10, threads = 1, words = 60, n_examples = 700;
  double ratio = 1.0;

  auto* train = app.add_subcommand("train", "Train a model from an experiment config");
  train->add_option("--config", config, "Experiment config or run manifest")->required();
  train->add_option("--out", out, "Output directory (overrides the config)");
  train->add_option("--seed", seed, "Training seed (overrides train.seed)");
  train->allow_extras();
  train->footer("Any config value can be overridden with a dotted flag, e.g. --mixing.kind Sub");

  auto* predict = app.add_subcommand("predict", "Write predictions for a dataset");
  predict->add_option("--snapshot", snapshot, "Snapshot written by train")->required();
  predict->add_option("--data", data, "Dataset to predict")->required();
  predict->add_option("--format", format, "canonical, tempowic or xlwic");
  predict->add_option("--field-mappings", mappings, "Field-mapping config for upstream formats");
  predict->add_option("--path", path_name, "classifier or similarity (default: the snapshot's eval path)");
  predict->add_option("--precomputed", precomputed, "Precomputed embeddings (precomputed-mode snapshots)");
  predict->add_option("--out", out, "Prediction file")->required();

  auto* score = app.add_subcommand("score", "Score a prediction file against a gold dataset");
  score->add_option("--pred", pred, "Prediction file (id<TAB>label)")->required();
  score->add_option("--gold", gold, "Gold dataset in canonical format")->required();
  score->add_option("--out", out, "Report file (default: <pred>.report.json)");

  auto* tune = app.add_subcommand("tune", "Random hyperparameter search");
  tune->add_option("--config", config, "Experiment config")->required();
  tune->add_option("--out", out, "Output directory (overrides the config)");
  tune->add_option("--seed", seed, "Base training seed");
  tune->add_option("--space", space, "Search space JSON (default space if omitted)");
  tune->add_option("--trials", trials, "Number of trials");
  tune->add_option("--search-seed", search_seed, "Seed of the trial sampler");
  tune->add_option("--threads", threads, "Trials run in parallel");
  tune->allow_extras();

  auto* mixcmd = app.add_subcommand("mix", "Mix main and auxiliary training data");
  mixcmd->add_option("--main", main_path, "Main training split")->required();
  mixcmd->add_option("--aux", aux_path, "Auxiliary training split");
  mixcmd->add_option("--main-format", main_format, "Format of --main");
  mixcmd->add_option("--aux-format", aux_format, "Format of --aux");
  mixcmd->add_option("--field-mappings", mappings, "Field-mapping config for upstream formats");
  mixcmd->add_option("--kind", kind, "No, Sub or All");
  mixcmd->add_option("--sub-ratio", ratio, "Auxiliary sample size relative to main (Sub)");
  mixcmd->add_option("--seed", mix_seed, "Sampling and shuffling seed");
  mixcmd->add_option("--out", out, "Output dataset (canonical format)")->required();

  auto* synth = app.add_subcommand("synth", "Generate the synthetic word-in-context task");
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--words", words, "Number of ambiguous target words");
  synth->add_option("--examples", n_examples, "Total number of examples");
  synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(config, train->remaining(), seed, out);
    if (*predict) return cmd_predict(snapshot, data, format, mappings, path_name, precomputed, out);
    if (*score) return cmd_score(pred, gold, out);
    if (*tune) return cmd_tune(config, tune->remaining(), seed, out, space, trials, search_seed, threads);
    if (*mixcmd) return cmd_mix(main_path, aux_path, main_format, aux_format, mappings, kind, ratio, mix_seed, out);
    if (*synth) return cmd_synth(out, words, n_examples, synth_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
