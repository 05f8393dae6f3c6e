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

#include "wcd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wcd/errors.hpp"
#include "wcd/lg_constraint.hpp"
#include "wcd/objective.hpp"

namespace fs = std::filesystem;

namespace wcd {

std::string LogEntry::to_json() const {
  nlohmann::ordered_json j;
  j["iteration"] = iteration;
  j["lr"] = lr;
  j["l_cc"] = l_cc;
  if (l_cp) j["l_cp"] = *l_cp;
  if (cp_weight) j["cp_weight"] = *cp_weight;
  if (l_lg) j["l_lg"] = *l_lg;
  j["total"] = total;
  return j.dump();
}

BatchSampler::BatchSampler(i64 dataset_size, i64 batch_size, std::uint64_t seed)
    : n_(dataset_size), batch_(batch_size), seed_(seed), pos_(dataset_size), epoch_(0) {
  if (n_ <= 0) throw ConfigError("sampler: empty dataset");
  if (batch_ <= 0) throw ConfigError("sampler: batch size must be positive");
  order_.resize(static_cast<std::size_t>(n_));
}

std::vector<i64> BatchSampler::next() {
  std::vector<i64> out;
  out.reserve(static_cast<std::size_t>(batch_));
  while (static_cast<i64>(out.size()) < batch_) {
    if (pos_ == n_) {
      for (i64 i = 0; i < n_; ++i) order_[static_cast<std::size_t>(i)] = i;
      Rng rng = derive_rng(seed_, "shuffle", static_cast<std::uint64_t>(epoch_));
      rng.shuffle(order_);
      ++epoch_;
      pos_ = 0;
    }
    out.push_back(order_[static_cast<std::size_t>(pos_++)]);
  }
  return out;
}

EvalResult evaluate(const TransWcdModel& model, const std::vector<ImagePair>& dataset,
                    const std::string& which) {
  if (which != "initial" && which != "final") {
    throw ConfigError("evaluate: which must be 'initial' or 'final'");
  }
  if (which == "final" && !model.has_decoder()) {
    throw ConfigError("evaluate: 'final' needs a decoder-bearing objective");
  }
  if (dataset.empty()) throw EmptyCounts("evaluate: empty dataset");

  ConfusionCounts counts;
  i64 cls_correct = 0;
  for (const ImagePair& pair : dataset) {
    if (!pair.has_gt()) throw MissingGT("evaluate: pair '" + pair.id + "' has no mask");
    TransWcdModel::Inference inf = model.infer(pair.pre, pair.post);
    const Tensor& mask = (which == "final") ? inf.pred_final : inf.pred_init;
    counts.accumulate(mask, pair.gt);
    const int pred_label = inf.p_cls >= 0.0 ? 1 : 0;
    if (pred_label == pair.y_cls) ++cls_correct;
  }
  EvalResult res;
  res.pixel = finalize(counts);
  res.cls_accuracy =
      static_cast<double>(cls_correct) / static_cast<double>(dataset.size());
  res.num_pairs = static_cast<i64>(dataset.size());
  res.which = which;
  return res;
}

CheckpointData make_checkpoint(const TransWcdModel& model, const AdamW* opt, i64 iteration,
                               std::uint64_t seed) {
  CheckpointData data;
  data.iteration = iteration;
  data.seed = seed;
  data.config_ini = to_ini(model.config());
  for (const auto& [name, var] : model.params().entries()) {
    data.params.emplace_back(name, var->value);
  }
  if (opt) {
    data.has_optimizer = true;
    data.weight_decay = opt->weight_decay();
    data.beta1 = opt->beta1();
    data.beta2 = opt->beta2();
    data.eps = opt->eps();
    for (const auto& slot : opt->slots()) {
      CheckpointData::SlotState s;
      s.name = slot.name;
      s.group = slot.group == LrGroup::Head ? "head" : "backbone";
      s.decay = slot.decay;
      s.gate_start = slot.gate_start;
      s.t = slot.t;
      s.m = slot.m;
      s.v = slot.v;
      data.slots.push_back(std::move(s));
    }
  }
  return data;
}

TransWcdModel model_from_checkpoint(const CheckpointData& data) {
  RunConfig cfg = make_run_config(parse_ini(data.config_ini));
  TransWcdModel model(cfg, data.seed);
  model.load_params(data.params);
  return model;
}

namespace {

/// Everything the loss composition of one iteration needs from one sample.
struct SampleLoss {
  ad::Var logit;
  int label = 0;
  ad::Var cp_term;      // set when the decoder term is live
  ad::Var lg_smooth;    // set in smooth penalty mode
  bool has_lg = false;
  double lg_value = 0.0;
};

SampleLoss process_sample(const TransWcdModel& model, const RunConfig& cfg,
                          const ImagePair& sample, i64 iteration, Rng* dropout_rng) {
  SampleLoss out;
  out.label = sample.y_cls;

  const i64 h = sample.pre.size(1), w = sample.pre.size(2);
  TransWcdModel::Forward f =
      model.forward(ad::constant(sample.pre), ad::constant(sample.post), dropout_rng);
  out.logit = f.p_cls;

  const bool decoder_mode = mode_has_decoder(cfg.mode);
  const bool lg_mode = mode_has_lg(cfg.mode);
  const bool gate_open = decoder_mode && iteration >= cfg.dp.start_iteration;
  const bool lg_wants_final =
      lg_mode && decoder_mode &&
      (cfg.lg.mask_source == LgConfig::MaskSource::Final || cfg.lg.mode == LgConfig::Mode::Smooth);

  ad::Var dp_logits;   // graph node when the gate is open
  Tensor dp_value;     // logits value, also available pre-gate for the penalty
  Tensor dec_feat;
  if (gate_open) {
    Tensor pred_init;
    const Tensor* pseudo = nullptr;
    if (sample.y_cls == 1) {
      // The pseudo-label is a constant: a fresh no-grad multi-scale pass.
      pred_init = predict_initial(model.multiscale_cam(sample.pre, sample.post), cfg.tau);
      pseudo = &pred_init;
    }
    SupervisionTarget target = select_target(sample.y_cls, pseudo, h, w);
    DpDecoder::Out dec = model.decoder().decode(f.feat_d4, h, w);
    out.cp_term = loss_cp(dec.logits, target.y);
    dp_logits = dec.logits;
    dp_value = dec.logits->value;
    dec_feat = dec.feat->value;
  } else if (lg_wants_final) {
    // The penalty is anchored from iteration 0; before the decoder term opens
    // its mask comes from a pure forward pass with no gradient tape.
    ad::NoGradGuard no_grad;
    DpDecoder::Out dec = model.decoder().decode(f.feat_d4, h, w);
    dp_value = dec.logits->value;
    dec_feat = dec.feat->value;
  }

  if (lg_mode) {
    out.has_lg = true;
    if (cfg.lg.mode == LgConfig::Mode::Smooth) {
      ad::Var m = gate_open ? ad::sigmoid(ad::max_all(dp_logits))
                            : ad::sigmoid(ad::max_all(ad::constant(dp_value)));
      out.lg_smooth = lg_penalty_smooth(sample.y_cls, m, cfg.lg.alpha);
      out.lg_value = out.lg_smooth->value.item();
    } else if (lg_wants_final) {
      Tensor pred = predict_final(dp_value);
      ChangedMask mask = changed_mask(pred, dec_feat);
      out.lg_value = lg_penalty(sample.y_cls, mask, cfg.lg, &dp_value);
    } else {
      // Initial-prediction wiring: threshold the fused map, pool over the
      // stage-4 difference features.
      Tensor pred = predict_initial(model.multiscale_cam(sample.pre, sample.post), cfg.tau);
      ChangedMask mask = changed_mask(pred, f.feat_d4->value);
      out.lg_value = lg_penalty(sample.y_cls, mask, cfg.lg, nullptr);
    }
  }
  return out;
}

}  // namespace

TrainOutcome run_training(const RunConfig& cfg, const std::vector<ImagePair>& train_set,
                          const std::vector<ImagePair>* eval_set, const TrainHooks& hooks) {
  validate_run_config(cfg);
  validate_config(cfg.encoder, cfg.crop_size, cfg.crop_size);
  if (train_set.empty()) throw ConfigError("train: empty dataset");

  TransWcdModel model(cfg, cfg.seed);

  AdamW opt(cfg.weight_decay);
  for (const auto& [name, var] : model.params().entries()) {
    const LrGroup group =
        TransWcdModel::is_head_param(name) ? LrGroup::Head : LrGroup::Backbone;
    const bool decay = !(name.ends_with(".bias") || name.ends_with(".gamma") ||
                         name.ends_with(".beta"));
    const i64 gate = TransWcdModel::is_decoder_param(name) ? cfg.dp.start_iteration : 0;
    opt.add_param(name, var, group, decay, gate);
  }

  const LrSchedule sched{cfg.base_lr, cfg.head_lr_mult, cfg.max_iterations,
                         cfg.warmup_iterations, cfg.poly_power};
  BatchSampler sampler(static_cast<i64>(train_set.size()), cfg.batch_size, cfg.seed);
  AugmentConfig aug;
  aug.enabled = cfg.augment;
  aug.out_size = cfg.crop_size;

  const std::vector<ImagePair>& eval_pairs = eval_set ? *eval_set : train_set;
  const bool decoder_mode = mode_has_decoder(cfg.mode);
  const bool lg_mode = mode_has_lg(cfg.mode);

  TrainOutcome outcome;
  for (i64 iter = 0; iter < cfg.max_iterations; ++iter) {
    opt.zero_grads();
    const std::vector<i64> idxs = sampler.next();

    std::vector<ad::Var> logits;
    std::vector<int> labels;
    std::vector<ad::Var> cp_terms, lg_terms;
    double lg_sum = 0.0;
    for (std::size_t slot = 0; slot < idxs.size(); ++slot) {
      const ImagePair& raw = train_set[static_cast<std::size_t>(idxs[slot])];
      Rng aug_rng = derive_rng(cfg.seed, "augment", static_cast<std::uint64_t>(iter),
                               static_cast<std::uint64_t>(slot));
      ImagePair sample = augment_pair(raw, aug, aug_rng);

      Rng drop_rng = derive_rng(cfg.seed, "dropout", static_cast<std::uint64_t>(iter),
                                static_cast<std::uint64_t>(slot));
      Rng* drop = cfg.encoder.drop_rate > 0.0 ? &drop_rng : nullptr;

      SampleLoss s = process_sample(model, cfg, sample, iter, drop);
      logits.push_back(s.logit);
      labels.push_back(s.label);
      if (s.cp_term) cp_terms.push_back(s.cp_term);
      if (s.lg_smooth) lg_terms.push_back(s.lg_smooth);
      if (s.has_lg) lg_sum += s.lg_value;
    }

    ad::Var total = loss_cc(logits, labels);
    LossParts parts;
    parts.l_cc = total->value.item();
    parts.epsilon_cp = cfg.epsilon_cp;
    parts.iteration = iter;
    parts.dp_start = cfg.dp.start_iteration;

    if (!cp_terms.empty()) {
      ad::Var l_cp = ad::average(cp_terms);
      parts.l_cp = l_cp->value.item();
      total = ad::add(total, ad::scale(l_cp, cfg.epsilon_cp));
    }
    if (lg_mode) {
      const double lg_mean = lg_sum / static_cast<double>(idxs.size());
      parts.l_lg = lg_mean;
      if (!lg_terms.empty()) {
        total = ad::add(total, ad::average(lg_terms));
      } else {
        total = ad::add_scalar(total, lg_mean);
      }
    }

    const double total_value = total->value.item();
    if (!std::isfinite(total_value)) {
      throw Error("train: non-finite loss at iteration " + std::to_string(iter) +
                  " (l_cc=" + std::to_string(parts.l_cc) + ")");
    }
    // Cross-check the composed graph against the scalar objective.
    const double expected = total_loss(parts, cfg.mode);
    if (std::abs(expected - total_value) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw Error("train: loss composition mismatch at iteration " + std::to_string(iter));
    }

    ad::backward(total);
    const double lr_b = lr_at(iter, LrGroup::Backbone, sched);
    const double lr_h = lr_at(iter, LrGroup::Head, sched);
    opt.step(iter, lr_b, lr_h);

    if (iter % cfg.log_interval == 0 || iter == cfg.max_iterations - 1) {
      LogEntry entry;
      entry.iteration = iter;
      entry.lr = lr_b;
      entry.l_cc = parts.l_cc;
      entry.l_cp = parts.l_cp;
      if (decoder_mode) {
        entry.cp_weight = iter >= cfg.dp.start_iteration ? cfg.epsilon_cp : 0.0;
      }
      entry.l_lg = parts.l_lg;
      entry.total = total_value;
      if (hooks.on_log) hooks.on_log(entry);
      outcome.log.push_back(std::move(entry));
    }

    outcome.iterations_run = iter + 1;
    if (cfg.eval_interval > 0 && (iter + 1) % cfg.eval_interval == 0 &&
        iter + 1 < cfg.max_iterations) {
      const bool use_final = decoder_mode && iter + 1 > cfg.dp.start_iteration;
      EvalResult res = evaluate(model, eval_pairs, use_final ? "final" : "initial");
      if (hooks.on_eval && hooks.on_eval(iter + 1, res)) {
        outcome.stopped_early = true;
        break;
      }
    }
  }

  const bool use_final = decoder_mode && outcome.iterations_run > cfg.dp.start_iteration;
  outcome.final_eval = evaluate(model, eval_pairs, use_final ? "final" : "initial");
  outcome.checkpoint = make_checkpoint(model, &opt, outcome.iterations_run, cfg.seed);
  return outcome;
}

TrainOutcome train_run(const RunConfig& cfg, const TrainHooks& hooks) {
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream out(fs::path(cfg.output_dir) / "config.ini");
    out << to_ini(cfg);
  }
  std::vector<ImagePair> train_set = load_pair_dataset(cfg.data_root, cfg.train_split);
  std::vector<ImagePair> val_set;
  const std::vector<ImagePair>* eval_set = nullptr;
  if (!cfg.val_split.empty()) {
    val_set = load_pair_dataset(cfg.data_root, cfg.val_split);
    eval_set = &val_set;
  }

  std::ofstream log_file(fs::path(cfg.output_dir) / "train_log.jsonl");
  TrainHooks wrapped = hooks;
  wrapped.on_log = [&](const LogEntry& e) {
    log_file << e.to_json() << "\n";
    log_file.flush();
    if (hooks.on_log) hooks.on_log(e);
  };
  wrapped.on_eval = [&](i64 iteration, const EvalResult& res) {
    nlohmann::ordered_json j;
    j["iteration"] = iteration;
    j["eval"] = nlohmann::ordered_json::parse(metrics_to_json(res.pixel));
    j["eval"]["cls_accuracy"] = res.cls_accuracy;
    j["eval"]["which"] = res.which;
    log_file << j.dump() << "\n";
    log_file.flush();
    return hooks.on_eval ? hooks.on_eval(iteration, res) : false;
  };

  TrainOutcome outcome = run_training(cfg, train_set, eval_set, wrapped);

  save_checkpoint((fs::path(cfg.output_dir) / "checkpoint.wcd").string(), outcome.checkpoint);
  if (outcome.final_eval) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(metrics_to_json(outcome.final_eval->pixel));
    j["cls_accuracy"] = outcome.final_eval->cls_accuracy;
    j["num_pairs"] = outcome.final_eval->num_pairs;
    j["which"] = outcome.final_eval->which;
    j["iterations_run"] = outcome.iterations_run;
    std::ofstream mf(fs::path(cfg.output_dir) / "metrics.json");
    mf << j.dump(2) << "\n";
  }
  return outcome;
}

std::string sweep_alpha(const RunConfig& cfg, const std::vector<double>& alphas,
                        const std::string& csv_path) {
  if (alphas.empty()) throw ConfigError("sweep-alpha: empty alpha list");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep-alpha: alpha outside [0,1]");
  }

  std::ostringstream csv;
  csv << "alpha,f1,precision,recall,oa,iou\n";
  for (double a : alphas) {
    RunConfig run = cfg;
    run.lg.alpha = a;
    run.lg_alpha_set = true;
    std::ostringstream dir;
    dir << cfg.output_dir << "/alpha_" << a;
    run.output_dir = dir.str();

    TrainOutcome outcome = train_run(run);
    const MetricsReport& m = outcome.final_eval->pixel;
    std::ostringstream row;
    row.precision(10);
    row << a << "," << m.f1 << "," << m.precision << "," << m.recall << "," << m.oa << ","
        << m.iou;
    csv << row.str() << "\n";
  }

  const std::string text = csv.str();
  if (!csv_path.empty()) {
    fs::path p(csv_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    out << text;
  }
  return text;
}

}  // namespace wcd
