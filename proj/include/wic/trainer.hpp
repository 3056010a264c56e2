#pragma once

// Mini-batch training of encoder + both heads, per-epoch dev evaluation on
// both paths, and best-epoch snapshotting.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wic/corpus.hpp"
#include "wic/dualhead.hpp"
#include "wic/encoder.hpp"
#include "wic/metrics.hpp"
#include "wic/model.hpp"
#include "wic/optimizer.hpp"
#include "wic/precomputed.hpp"
#include "wic/random.hpp"
#include "wic/spanalign.hpp"

namespace wic {

struct TrainConfig {
  double learning_rate = 5e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
  OptimizerKind optimizer = OptimizerKind::adam;
  MixingStrategy mixing;
  LossConfig loss;
  OutputPath eval_path = OutputPath::similarity;

  // reference encoder shape (ignored in precomputed mode, except dropout)
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t max_len = 128;
  double init_scale = 0.1;
  double dropout_p = 0.1;

  bool skip_overlong = true;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ConfigError("weight_decay must be >= 0");
    if (!(mixing.sub_ratio > 0.0)) throw ConfigError("mixing.sub_ratio must be > 0");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must lie in [0, 1)");
    if (embed_dim == 0 || hidden_dim == 0 || max_len < 4) throw ConfigError("encoder dimensions too small");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
    loss.validate();
  }

  OptimizerConfig optimizer_config() const {
    OptimizerConfig o;
    o.kind = optimizer;
    o.learning_rate = learning_rate;
    o.weight_decay = weight_decay;
    return o;
  }
};

inline void to_json(nlohmann::ordered_json& j, const TrainConfig& c) {
  j = nlohmann::ordered_json{
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"weight_decay", c.weight_decay},
      {"optimizer", to_string(c.optimizer)},
      {"eval_path", to_string(c.eval_path)},
      {"embed_dim", c.embed_dim},
      {"hidden_dim", c.hidden_dim},
      {"max_len", c.max_len},
      {"init_scale", c.init_scale},
      {"dropout_p", c.dropout_p},
      {"skip_overlong", c.skip_overlong},
      {"mixing", {{"kind", to_string(c.mixing.kind)}, {"sub_ratio", c.mixing.sub_ratio}, {"seed", c.mixing.seed}}},
      {"loss",
       {{"lambda_ce", c.loss.lambda_ce},
        {"lambda_cos", c.loss.lambda_cos},
        {"margin", c.loss.margin},
        {"threshold_p", c.loss.threshold_p}}},
  };
}

// Missing keys keep their defaults.
inline TrainConfig train_config_from_json(const nlohmann::ordered_json& j, TrainConfig c = {}) {
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    if (j.contains("optimizer")) c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    if (j.contains("eval_path")) c.eval_path = output_path_from_string(j.at("eval_path").get<std::string>());
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.max_len = j.value("max_len", c.max_len);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.dropout_p = j.value("dropout_p", c.dropout_p);
    c.skip_overlong = j.value("skip_overlong", c.skip_overlong);
    if (j.contains("mixing")) {
      const auto& m = j.at("mixing");
      if (m.contains("kind")) c.mixing.kind = mix_kind_from_string(m.at("kind").get<std::string>());
      c.mixing.sub_ratio = m.value("sub_ratio", c.mixing.sub_ratio);
      c.mixing.seed = m.value("seed", c.mixing.seed);
    }
    if (j.contains("loss")) {
      const auto& l = j.at("loss");
      c.loss.lambda_ce = l.value("lambda_ce", c.loss.lambda_ce);
      c.loss.lambda_cos = l.value("lambda_cos", c.loss.lambda_cos);
      c.loss.margin = l.value("margin", c.loss.margin);
      c.loss.threshold_p = l.value("threshold_p", c.loss.threshold_p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad training config: ") + e.what());
  }
  return c;
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss_ce = 0.0;   // mean of lambda_ce * CE
  double loss_cos = 0.0;  // mean of lambda_cos * cosine loss
  double loss_total = 0.0;
  double dev_f1_classifier = 0.0;
  double dev_f1_similarity = 0.0;

  double dev_f1(OutputPath p) const { return p == OutputPath::classifier ? dev_f1_classifier : dev_f1_similarity; }
};

struct RunHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based
  double best_dev_f1 = 0.0;
};

inline std::string format_history(const RunHistory& h) {
  std::string out = "epoch\tloss_ce\tloss_cos\tloss_total\tdev_f1_classifier\tdev_f1_similarity\n";
  char buf[256];
  for (const auto& e : h.epochs) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n", e.epoch, e.loss_ce, e.loss_cos,
                  e.loss_total, e.dev_f1_classifier, e.dev_f1_similarity);
    out += buf;
  }
  return out;
}

// An example aligned against the model's input representation.
struct PreparedExample {
  const WicExample* example = nullptr;
  JointEncoding joint;
  const Matrix* frozen = nullptr;  // precomputed token vectors
};

struct PreparedSet {
  std::vector<PreparedExample> items;
  std::size_t skipped_overlong = 0;
};

inline PreparedSet prepare(const std::vector<WicExample>& examples, const Model& model,
                           const PrecomputedStore* store, std::size_t max_len, bool skip_overlong) {
  PreparedSet set;
  set.items.reserve(examples.size());
  const WhitespaceTokenizer tokenizer(model.vocab);
  for (const auto& ex : examples) {
    PreparedExample p;
    p.example = &ex;
    try {
      if (model.mode == EncoderMode::toy) {
        p.joint = build_joint_input(ex, tokenizer);
      } else {
        const auto& rec = store->at(ex.id);
        p.joint = align_external(ex, rec.offsets);
        p.frozen = &rec.vectors;
      }
    } catch (const Error& e) {
      throw DataError("example '" + ex.id + "': " + e.what());
    }
    if (model.mode == EncoderMode::toy && p.joint.size() > max_len) {
      if (!skip_overlong) {
        throw DataError("example '" + ex.id + "': sequence too long (" + std::to_string(p.joint.size()) + " > " +
                        std::to_string(max_len) + ")");
      }
      ++set.skipped_overlong;
      continue;
    }
    set.items.push_back(std::move(p));
  }
  return set;
}

struct PathReports {
  EvalReport classifier;
  EvalReport similarity;

  const EvalReport& operator[](OutputPath p) const { return p == OutputPath::classifier ? classifier : similarity; }
};

struct ScoredExample {
  std::string id;
  SenseLabel gold;
  PathOutputs outputs;
};

inline std::vector<ScoredExample> run_inference(const Model& model, const PreparedSet& set, const LossConfig& loss) {
  std::vector<ScoredExample> out;
  out.reserve(set.items.size());
  for (const auto& p : set.items) {
    const auto r = forward_backward(model, p.joint, p.frozen, p.example->label, loss);
    out.push_back({p.example->id, p.example->label, r.outputs});
  }
  return out;
}

inline PathReports evaluate_paths(const std::vector<ScoredExample>& scored, const LossConfig& loss) {
  std::vector<SenseLabel> golds, cls, sim;
  for (const auto& s : scored) {
    golds.push_back(s.gold);
    cls.push_back(predict(s.outputs, OutputPath::classifier, loss));
    sim.push_back(predict(s.outputs, OutputPath::similarity, loss));
  }
  return {evaluate(golds, cls), evaluate(golds, sim)};
}

struct TrainResult {
  Model best;
  RunHistory history;
  std::size_t skipped_train = 0;
  std::size_t skipped_dev = 0;
};

inline Model init_model(const TrainConfig& cfg, const std::vector<WicExample>& train_data,
                        const PrecomputedStore* store) {
  Model m;
  std::size_t dim = cfg.embed_dim;
  if (store) {
    m.mode = EncoderMode::precomputed;
    dim = store->dim();
    if (dim == 0) throw DataError("precomputed embedding store is empty");
  } else {
    EncoderConfig ec;
    ec.embed_dim = cfg.embed_dim;
    ec.hidden_dim = cfg.hidden_dim;
    ec.max_len = cfg.max_len;
    ec.vocab = Vocab::from_examples(train_data);
    ec.init_seed = derive_seed(cfg.seed, 1);
    ec.init_scale = cfg.init_scale;
    m.vocab = ec.vocab;
    m.encoder = init_params(ec);
  }
  Rng head_rng(derive_seed(cfg.seed, 2));
  m.head = init_head(dim, cfg.dropout_p, cfg.init_scale, head_rng);
  return m;
}

// Runs the full schedule; returns the parameters of the epoch with the best
// dev macro-F1 on cfg.eval_path (earliest epoch on ties). All randomness is
// derived from cfg.seed and cfg.mixing.seed.
inline TrainResult train_model(const TrainConfig& cfg, const std::vector<WicExample>& main_train,
                               const std::vector<WicExample>& aux_train, const std::vector<WicExample>& dev,
                               const PrecomputedStore* store = nullptr,
                               const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  if (dev.empty()) throw DataError("dev split is empty");
  const auto data = mix(main_train, aux_train, cfg.mixing);
  Model model = init_model(cfg, data, store);

  const auto train_set = prepare(data, model, store, cfg.max_len, cfg.skip_overlong);
  const auto dev_set = prepare(dev, model, store, cfg.max_len, cfg.skip_overlong);
  if (train_set.items.empty()) throw DataError("no trainable examples left after preparation");
  if (dev_set.items.empty()) throw DataError("no dev examples left after preparation");
  for (auto [n, what] : {std::pair{train_set.skipped_overlong, "training"}, {dev_set.skipped_overlong, "dev"}}) {
    if (n) std::cerr << "warning: skipped " << n << " overlong " << what << " example(s)\n";
  }

  Rng shuffle_rng(derive_seed(cfg.seed, 3));
  Rng dropout_rng(derive_seed(cfg.seed, 4));
  Optimizer optimizer(cfg.optimizer_config());
  ModelGrad grad = ModelGrad::zeros_like(model);

  TrainResult result;
  result.skipped_train = train_set.skipped_overlong;
  result.skipped_dev = dev_set.skipped_overlong;
  result.best = model;
  std::vector<std::size_t> order(train_set.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& block : param_blocks(grad)) std::fill(block.values.begin(), block.values.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& p = train_set.items[order[k]];
        const auto r = forward_backward(model, p.joint, p.frozen, p.example->label, cfg.loss, &dropout_rng, &grad,
                                        scale);
        const double ce = cfg.loss.lambda_ce * r.cross_entropy;
        const double cos = cfg.loss.lambda_cos * r.cosine_loss;
        rec.loss_ce += ce;
        rec.loss_cos += cos;
        rec.loss_total += ce + cos;
      }
      optimizer.step(model, grad);
    }
    const double n = static_cast<double>(order.size());
    rec.loss_ce /= n;
    rec.loss_cos /= n;
    rec.loss_total /= n;

    const auto reports = evaluate_paths(run_inference(model, dev_set, cfg.loss), cfg.loss);
    rec.dev_f1_classifier = reports.classifier.macro_f1;
    rec.dev_f1_similarity = reports.similarity.macro_f1;
    result.history.epochs.push_back(rec);
    if (epoch == 1 || rec.dev_f1(cfg.eval_path) > result.history.best_dev_f1) {
      result.history.best_dev_f1 = rec.dev_f1(cfg.eval_path);
      result.history.best_epoch = epoch;
      result.best = model;
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Snapshots

inline nlohmann::ordered_json snapshot_json(const Model& model, const nlohmann::ordered_json& producing_config) {
  nlohmann::ordered_json j;
  j["format"] = "wic-snapshot-1";
  j["config"] = producing_config;
  j["mode"] = to_string(model.mode);
  j["dropout_p"] = model.head.dropout_p;
  j["vocab"] = model.vocab.tokens();
  auto blocks = nlohmann::ordered_json::array();
  Model copy = model;
  for (const auto& b : param_blocks(copy)) {
    nlohmann::ordered_json jb;
    jb["name"] = b.name;
    jb["shape"] = b.shape;
    jb["values"] = std::vector<double>(b.values.begin(), b.values.end());
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline void save_snapshot(const std::string& path, const Model& model, const nlohmann::ordered_json& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << snapshot_json(model, config).dump(1) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

struct Snapshot {
  Model model;
  nlohmann::ordered_json config;
};

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (j.value("format", std::string()) != "wic-snapshot-1") throw DataError(path + ": not a snapshot file");

  Snapshot s;
  s.config = j.at("config");
  s.model.mode = encoder_mode_from_string(j.at("mode").get<std::string>());
  s.model.vocab = Vocab(j.at("vocab").get<std::vector<std::string>>());

  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> stored;
  for (const auto& b : j.at("blocks")) {
    stored[b.at("name").get<std::string>()] = {b.at("shape").get<std::vector<std::size_t>>(),
                                               b.at("values").get<std::vector<double>>()};
  }
  const auto shape_of = [&](const std::string& name) -> const std::vector<std::size_t>& {
    const auto it = stored.find(name);
    if (it == stored.end()) throw DataError(path + ": missing block " + name);
    return it->second.first;
  };
  const auto& hw = shape_of("head.dense_weight");
  if (hw.size() != 2) throw DataError(path + ": bad head shape");
  s.model.head = HeadParams::zeros(hw[0], j.at("dropout_p").get<double>());
  if (s.model.mode == EncoderMode::toy) {
    const auto& te = shape_of("encoder.token_embedding");
    const auto& pe = shape_of("encoder.position_embedding");
    const auto& mb = shape_of("encoder.mix_bias");
    if (te.size() != 2 || pe.size() != 2 || mb.size() != 1) throw DataError(path + ": bad encoder shape");
    s.model.encoder = EncoderParams::zeros(te[0], pe[0], te[1], mb[0]);
  }
  for (auto& b : param_blocks(s.model)) {
    const auto it = stored.find(b.name);
    if (it == stored.end()) throw DataError(path + ": missing block " + b.name);
    if (it->second.first != b.shape || it->second.second.size() != b.values.size()) {
      throw DataError(path + ": shape mismatch in block " + b.name);
    }
    std::copy(it->second.second.begin(), it->second.second.end(), b.values.begin());
  }
  if (s.model.mode == EncoderMode::toy && s.model.vocab.size() != s.model.encoder.token_embedding.rows) {
    throw DataError(path + ": vocabulary size does not match the token embedding");
  }
  return s;
}

}  // namespace wic
