/*
 * Copyright 2026 TransWCD-CPP Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WCD_TRAINER_HPP_
#define WCD_TRAINER_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wcd/checkpoint.hpp"
#include "wcd/config.hpp"
#include "wcd/data.hpp"
#include "wcd/metrics.hpp"
#include "wcd/model.hpp"
#include "wcd/optim.hpp"

namespace wcd {

/// One training log line; serialized as a JSON object per interval.
struct LogEntry {
  i64 iteration = 0;
  double lr = 0.0;  // backbone group rate
  double l_cc = 0.0;
  std::optional<double> l_cp;       // present once the decoder term is live
  std::optional<double> cp_weight;  // present in decoder modes: 0 before the gate
  std::optional<double> l_lg;
  double total = 0.0;
  std::string to_json() const;
};

struct EvalResult {
  MetricsReport pixel;
  double cls_accuracy = 0.0;
  i64 num_pairs = 0;
  std::string which;  // mask the pixel metrics were computed from
};

struct TrainHooks {
  std::function<void(const LogEntry&)> on_log;
  /// Called after each periodic evaluation; returning true stops training.
  std::function<bool(i64 iteration, const EvalResult&)> on_eval;
};

struct TrainOutcome {
  i64 iterations_run = 0;
  bool stopped_early = false;
  std::vector<LogEntry> log;
  CheckpointData checkpoint;
  std::optional<EvalResult> final_eval;
};

/// Deterministic batch order: each epoch is a seeded permutation of the
/// dataset, consumed with wrap-around so batches may straddle epochs.
class BatchSampler {
 public:
  BatchSampler(i64 dataset_size, i64 batch_size, std::uint64_t seed);
  std::vector<i64> next();

 private:
  i64 n_, batch_;
  std::uint64_t seed_;
  std::vector<i64> order_;
  i64 pos_, epoch_;
};

/// Full optimization loop: seeded model init, per-iteration batch assembly
/// with paired augmentation, loss composition for the configured objective
/// (decoder term gated by dp.start_iteration, penalty term live throughout),
/// decoupled-weight-decay adaptive updates with warm-up/poly learning rates,
/// periodic logging and evaluation, final checkpoint assembly. Aborts with
/// wcd::Error on a non-finite loss. `eval_set` defaults to the training set.
TrainOutcome run_training(const RunConfig& cfg, const std::vector<ImagePair>& train_set,
                          const std::vector<ImagePair>* eval_set = nullptr,
                          const TrainHooks& hooks = {});

/// Micro-averaged pixel metrics plus image-level classification accuracy
/// over a dataset. `which` selects the mask: "initial" (thresholded fused
/// activation map) or "final" (decoder mask; ConfigError without a decoder).
/// Throws MissingGT when any pair lacks a ground-truth mask.
EvalResult evaluate(const TransWcdModel& model, const std::vector<ImagePair>& dataset,
                    const std::string& which);

/// Bundle current model + optimizer state into a checkpoint record.
CheckpointData make_checkpoint(const TransWcdModel& model, const AdamW* opt, i64 iteration,
                               std::uint64_t seed);

/// Rebuild the model a checkpoint was saved from (config text + seed) and
/// load its parameter values.
TransWcdModel model_from_checkpoint(const CheckpointData& data);

/// Train per config, writing config.ini, train_log.jsonl, checkpoint.wcd and
/// metrics.json under cfg.output_dir. Returns the outcome for inspection.
TrainOutcome train_run(const RunConfig& cfg, const TrainHooks& hooks = {});

/// One full train+eval per alpha under a shared seed; returns the CSV text
/// ("alpha,f1,precision,recall,oa,iou" header plus one row per alpha) and
/// writes it to csv_path when non-empty. ConfigError on alpha outside [0,1].
std::string sweep_alpha(const RunConfig& cfg, const std::vector<double>& alphas,
                        const std::string& csv_path);

}  // namespace wcd

#endif  // WCD_TRAINER_HPP_
