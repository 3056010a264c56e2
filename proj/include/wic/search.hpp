#pragma once

// Random hyperparameter search over learning rate, epochs, batch size,
// weight decay and seed. Trial configs depend only on (space, search seed,
// trial index), so results do not depend on how trials are scheduled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wic/error.hpp"
#include "wic/random.hpp"
#include "wic/trainer.hpp"

namespace wic {

struct Distribution {
  enum class Kind { log_uniform, uniform, int_uniform, choice };

  Kind kind = Kind::uniform;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> choices;

  static Distribution log_uniform(double lo, double hi) { return {Kind::log_uniform, lo, hi, {}}; }
  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi, {}}; }
  static Distribution int_uniform(double lo, double hi) { return {Kind::int_uniform, lo, hi, {}}; }
  static Distribution choice(std::vector<double> values) { return {Kind::choice, 0, 0, std::move(values)}; }

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::log_uniform: return std::exp(rng.uniform(std::log(lo), std::log(hi)));
      case Kind::uniform: return rng.uniform(lo, hi);
      case Kind::int_uniform:
        return static_cast<double>(rng.between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
      case Kind::choice: return choices[rng.below(choices.size())];
    }
    return lo;
  }

  void validate(const std::string& name) const {
    const bool ok = kind == Kind::choice ? !choices.empty()
                    : kind == Kind::log_uniform ? (lo > 0.0 && hi >= lo)
                                                : hi >= lo;
    if (!ok) throw ConfigError("invalid search distribution for " + name);
  }
};

// Keys of the space, sampled in this order.
inline const std::vector<std::string>& search_keys() {
  static const std::vector<std::string> keys = {"learning_rate", "epochs", "batch_size", "weight_decay", "seed"};
  return keys;
}

using SearchSpace = std::map<std::string, Distribution>;

inline SearchSpace default_search_space(EncoderMode mode) {
  return {
      {"learning_rate", mode == EncoderMode::toy ? Distribution::log_uniform(1e-4, 1e-2)
                                                 : Distribution::log_uniform(1e-5, 1e-4)},
      {"epochs", Distribution::int_uniform(5, 40)},
      {"batch_size", Distribution::choice({8, 16, 32})},
      {"weight_decay", Distribution::log_uniform(1e-4, 1e-1)},
      {"seed", Distribution::int_uniform(0, 9999)},
  };
}

// {"learning_rate": {"log_uniform": [lo, hi]}, "batch_size": {"choice": [..]}, ...}
inline SearchSpace search_space_from_json(const nlohmann::json& j) {
  SearchSpace space;
  for (const auto& [name, spec] : j.items()) {
    if (std::find(search_keys().begin(), search_keys().end(), name) == search_keys().end()) {
      throw ConfigError("unknown search hyperparameter '" + name + "'");
    }
    if (!spec.is_object() || spec.size() != 1) throw ConfigError("search entry '" + name + "' needs one kind");
    const auto& [kind, args] = *spec.items().begin();
    const auto values = args.get<std::vector<double>>();
    Distribution d;
    if (kind == "choice") {
      d = Distribution::choice(values);
    } else {
      if (values.size() != 2) throw ConfigError("search entry '" + name + "' needs [lo, hi]");
      if (kind == "log_uniform") d = Distribution::log_uniform(values[0], values[1]);
      else if (kind == "uniform") d = Distribution::uniform(values[0], values[1]);
      else if (kind == "int_uniform") d = Distribution::int_uniform(values[0], values[1]);
      else throw ConfigError("unknown distribution kind '" + kind + "'");
    }
    d.validate(name);
    space[name] = d;
  }
  return space;
}

inline TrainConfig sample_trial_config(const SearchSpace& space, const TrainConfig& fixed, std::uint64_t search_seed,
                                       std::size_t trial) {
  Rng rng(derive_seed(search_seed, trial));
  TrainConfig cfg = fixed;
  for (const auto& key : search_keys()) {
    const auto it = space.find(key);
    if (it == space.end()) continue;
    const double v = it->second.sample(rng);
    if (key == "learning_rate") cfg.learning_rate = v;
    else if (key == "epochs") cfg.epochs = static_cast<std::size_t>(std::llround(v));
    else if (key == "batch_size") cfg.batch_size = static_cast<std::size_t>(std::llround(v));
    else if (key == "weight_decay") cfg.weight_decay = v;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::llround(v));
  }
  return cfg;
}

struct TrialRecord {
  std::size_t index = 0;
  TrainConfig config;
  double best_dev_f1 = 0.0;
  std::size_t best_epoch = 0;
  bool ok = false;
  std::string error;
};

inline nlohmann::ordered_json to_json(const TrialRecord& t) {
  nlohmann::ordered_json j;
  j["trial"] = t.index;
  j["status"] = t.ok ? "ok" : "failed";
  j["best_dev_f1"] = t.best_dev_f1;
  j["best_epoch"] = t.best_epoch;
  nlohmann::ordered_json cfg;
  to_json(cfg, t.config);
  j["config"] = cfg;
  if (!t.ok) j["error"] = t.error;
  return j;
}

inline TrialRecord trial_from_json(const nlohmann::ordered_json& j) {
  TrialRecord t;
  t.index = j.at("trial").get<std::size_t>();
  t.ok = j.at("status").get<std::string>() == "ok";
  t.best_dev_f1 = j.at("best_dev_f1").get<double>();
  t.best_epoch = j.at("best_epoch").get<std::size_t>();
  t.config = train_config_from_json(j.at("config"));
  t.error = j.value("error", std::string());
  return t;
}

// Successful trials by best_dev_f1 descending, lower index first on ties.
inline std::vector<std::size_t> rank_trials(const std::vector<TrialRecord>& trials) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].ok) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (trials[a].best_dev_f1 != trials[b].best_dev_f1) return trials[a].best_dev_f1 > trials[b].best_dev_f1;
    return trials[a].index < trials[b].index;
  });
  return order;
}

struct SearchData {
  const std::vector<WicExample>* main_train = nullptr;
  const std::vector<WicExample>* aux_train = nullptr;
  const std::vector<WicExample>* dev = nullptr;
  const PrecomputedStore* store = nullptr;
};

struct SearchOptions {
  std::size_t threads = 1;
  std::string trial_log;  // JSON lines, one per trial in index order; empty = none
};

struct SearchResult {
  std::vector<TrialRecord> trials;  // by trial index
  std::vector<std::size_t> ranking;
};

inline SearchResult random_search(const SearchSpace& space, std::size_t n_trials, std::uint64_t search_seed,
                                  const TrainConfig& fixed, const SearchData& data, const SearchOptions& opt = {}) {
  if (n_trials < 1) throw ConfigError("random search needs at least one trial");
  for (const auto& [name, d] : space) d.validate(name);

  std::ofstream log;
  if (!opt.trial_log.empty()) {
    log.open(opt.trial_log, std::ios::binary | std::ios::trunc);
    if (!log) throw DataError("cannot open trial log " + opt.trial_log);
  }

  SearchResult result;
  result.trials.resize(n_trials);
  std::vector<bool> done(n_trials, false);
  std::size_t next_to_log = 0;
  std::mutex mu;
  std::atomic<std::size_t> next_trial{0};

  const auto run = [&] {
    while (true) {
      const std::size_t i = next_trial.fetch_add(1);
      if (i >= n_trials) return;
      TrialRecord rec;
      rec.index = i;
      rec.config = sample_trial_config(space, fixed, search_seed, i);
      try {
        const auto r = train_model(rec.config, *data.main_train, *data.aux_train, *data.dev, data.store);
        rec.best_dev_f1 = r.history.best_dev_f1;
        rec.best_epoch = r.history.best_epoch;
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      std::lock_guard lock(mu);
      result.trials[i] = std::move(rec);
      done[i] = true;
      // flush finished trials in index order
      while (next_to_log < n_trials && done[next_to_log]) {
        if (log.is_open()) log << to_json(result.trials[next_to_log]).dump() << '\n' << std::flush;
        ++next_to_log;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.threads, n_trials));
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  result.ranking = rank_trials(result.trials);
  return result;
}

}  // namespace wic
