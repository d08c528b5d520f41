#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace hybridtok {

// Optimiser and schedule settings used for both foundation-model and
// next-k-mer training. Recorded for downstream trainers; nothing here trains.
struct TrainingHyperparameters {
  double learning_rate = 4e-4;
  double adam_epsilon = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double weight_decay = 0.01;
  int train_batch = 16;
  int eval_batch = 32;
  int grad_accum = 25;
  int warmup_steps = 1000;
  int max_steps = 20000;
  int save_every = 2500;
  int save_total_limit = 20;
  int eval_every = 2500;
  int log_every = 500;

  nlohmann::json to_json() const {
    return {{"learning_rate", learning_rate}, {"adam_epsilon", adam_epsilon},
            {"beta1", beta1},                 {"beta2", beta2},
            {"weight_decay", weight_decay},   {"train_batch", train_batch},
            {"eval_batch", eval_batch},       {"grad_accum", grad_accum},
            {"warmup_steps", warmup_steps},   {"max_steps", max_steps},
            {"save_every", save_every},       {"save_total_limit", save_total_limit},
            {"eval_every", eval_every},       {"log_every", log_every}};
  }
};

struct PipelineManifest {
  std::string vocab_digest;
  std::string merge_digest;
  std::string corpus_digest;
  nlohmann::json parameters = nlohmann::json::object();
  TrainingHyperparameters hyperparameters;

  nlohmann::json to_json() const {
    return {{"vocab_digest", vocab_digest},
            {"merge_digest", merge_digest},
            {"corpus_digest", corpus_digest},
            {"parameters", parameters},
            {"hyperparameters", hyperparameters.to_json()}};
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }
};

}  // namespace hybridtok
