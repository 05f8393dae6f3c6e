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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "wcd/checkpoint.hpp"
#include "wcd/config.hpp"
#include "wcd/data.hpp"
#include "wcd/errors.hpp"
#include "wcd/metrics.hpp"
#include "wcd/model.hpp"
#include "wcd/trainer.hpp"

namespace fs = std::filesystem;
using namespace wcd;

namespace {

bool bits_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.numel()) * sizeof(double)) == 0;
}

/// Small, fast run configuration; overrides go through the same code path as
/// INI keys so defaults and validation stay involved.
RunConfig tiny_cfg(const std::map<std::string, std::string>& extra = {}) {
  KeyValues kv = {
      {"encoder.preset", "desk_tiny"},
      {"cam.scales", "1.0"},
      {"cam.tau", "0.45"},
      {"train.base_lr", "1e-4"},
      {"train.max_iterations", "2"},
      {"train.warmup_iterations", "1"},
      {"train.batch_size", "2"},
      {"train.log_interval", "1"},
      {"train.eval_interval", "0"},
      {"data.crop_size", "32"},
      {"data.augment", "false"},
  };
  for (const auto& [k, v] : extra) kv[k] = v;
  return make_run_config(kv);
}

std::vector<ImagePair> tiny_dataset(i64 n, std::uint64_t seed = 7) {
  SynthSpec spec;
  spec.num_pairs = n;
  spec.size = 32;
  spec.seed = seed;
  return make_synthetic_dataset(spec);
}

fs::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("wcd_pipeline_test_" + tag + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("model parameters: deterministic init, stable order, per-mode sets") {
  RunConfig cfg = tiny_cfg({{"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"}});
  TransWcdModel a(cfg, 11), b(cfg, 11), c(cfg, 12);

  const auto ea = a.params().entries();
  const auto eb = b.params().entries();
  REQUIRE(ea.size() == eb.size());
  bool any_differs_from_c = false;
  const auto ec = c.params().entries();
  std::set<std::string> names;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    CHECK(ea[i].first == eb[i].first);
    CHECK(bits_equal(ea[i].second->value, eb[i].second->value));
    if (!bits_equal(ea[i].second->value, ec[i].second->value)) any_differs_from_c = true;
    CHECK(names.insert(ea[i].first).second);  // unique names
  }
  CHECK(any_differs_from_c);

  // Creation order: encoder block first, classifier present, decoder last.
  CHECK(ea.front().first.rfind("encoder.", 0) == 0);
  CHECK(names.count("head.classifier.weight") == 1);
  CHECK(ea.back().first.rfind("decoder.", 0) == 0);

  // The classifier-only objective trains no decoder parameters.
  TransWcdModel plain(tiny_cfg(), 11);
  CHECK_FALSE(plain.has_decoder());
  CHECK_THROWS_AS(plain.decoder(), ConfigError);
  for (const auto& [name, var] : plain.params().entries()) {
    CHECK_FALSE(TransWcdModel::is_decoder_param(name));
  }
}

TEST_CASE("learning-rate group and gate classification of parameter names") {
  RunConfig cfg = tiny_cfg({{"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"}});
  TransWcdModel model(cfg, 3);
  i64 backbone = 0, head = 0, decoder = 0;
  for (const auto& [name, var] : model.params().entries()) {
    const bool is_encoder = name.rfind("encoder.", 0) == 0;
    // The boosted group is exactly the non-backbone set.
    CHECK(TransWcdModel::is_head_param(name) == !is_encoder);
    CHECK(TransWcdModel::is_decoder_param(name) == (name.rfind("decoder.", 0) == 0));
    backbone += is_encoder ? 1 : 0;
    head += is_encoder ? 0 : 1;
    decoder += TransWcdModel::is_decoder_param(name) ? 1 : 0;
    if (TransWcdModel::is_decoder_param(name)) CHECK(TransWcdModel::is_head_param(name));
  }
  CHECK(backbone > 0);
  CHECK(head > 0);
  CHECK(decoder > 0);
}

TEST_CASE("forward: shapes and determinism for both stream layouts") {
  std::vector<ImagePair> ds = tiny_dataset(2);
  Tensor pre64 = bilinear_resize(ds[0].pre, 64, 64);
  Tensor post64 = bilinear_resize(ds[0].post, 64, 64);

  for (const char* stream : {"single", "dual"}) {
    CAPTURE(stream);
    RunConfig cfg = tiny_cfg({{"model.stream", stream}, {"data.crop_size", "64"}});
    TransWcdModel model(cfg, 5);
    TransWcdModel::Forward f =
        model.forward(ad::constant(pre64), ad::constant(post64));
    // Stage-4 features: (C4, H/32, W/32).
    REQUIRE(f.feat_d4->value.ndim() == 3);
    CHECK(f.feat_d4->value.size(0) == 128);
    CHECK(f.feat_d4->value.size(1) == 2);
    CHECK(f.feat_d4->value.size(2) == 2);
    CHECK(f.raw_cam->value.size(0) == 1);
    CHECK(f.raw_cam->value.size(1) == 2);
    CHECK(f.raw_cam->value.size(2) == 2);
    CHECK(f.p_cls->value.numel() == 1);

    // No dropout stream: repeated forwards agree bit-for-bit.
    TransWcdModel::Forward g =
        model.forward(ad::constant(pre64), ad::constant(post64));
    CHECK(f.p_cls->value.item() == g.p_cls->value.item());

    // The classification logit is the exact spatial mean of the raw map.
    CHECK(f.p_cls->value.item() ==
          doctest::Approx(mean_all(f.raw_cam->value)).epsilon(1e-12));
  }
}

TEST_CASE("multiscale_cam: shape, range, determinism, input validation") {
  RunConfig cfg = tiny_cfg({{"cam.scales", "0.5,1.0,2.0"}, {"data.crop_size", "64"}});
  TransWcdModel model(cfg, 9);
  std::vector<ImagePair> ds = tiny_dataset(1, 3);
  Tensor pre = bilinear_resize(ds[0].pre, 64, 64);
  Tensor post = bilinear_resize(ds[0].post, 64, 64);

  Tensor cam = model.multiscale_cam(pre, post);
  REQUIRE(cam.ndim() == 2);
  CHECK(cam.size(0) == 64);
  CHECK(cam.size(1) == 64);
  for (i64 i = 0; i < cam.numel(); ++i) {
    CHECK(cam[i] >= 0.0);
    CHECK(cam[i] < 1.0);
  }
  CHECK(bits_equal(cam, model.multiscale_cam(pre, post)));

  CHECK_THROWS_AS(model.multiscale_cam(pre, bilinear_resize(post, 64, 96)), ShapeMismatch);
  // Side not a multiple of 32 fails encoder input validation.
  CHECK_THROWS_AS(model.multiscale_cam(bilinear_resize(pre, 48, 64),
                                       bilinear_resize(post, 48, 64)),
                  Error);
}

TEST_CASE("infer: masks are binary and consistent with the thresholding rules") {
  std::vector<ImagePair> ds = tiny_dataset(2, 5);

  RunConfig dl = tiny_cfg({{"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"}});
  TransWcdModel model(dl, 21);
  TransWcdModel::Inference inf = model.infer(ds[1].pre, ds[1].post);
  CHECK(inf.cam.size(0) == 32);
  CHECK(bits_equal(inf.pred_init, predict_initial(inf.cam, dl.tau)));
  REQUIRE(inf.dp_logits.defined());
  CHECK(inf.dp_logits.size(0) == 32);
  CHECK(inf.dp_logits.size(1) == 32);
  CHECK(bits_equal(inf.pred_final, predict_final(inf.dp_logits)));
  for (i64 i = 0; i < inf.pred_final.numel(); ++i) {
    CHECK((inf.pred_final[i] == 0.0 || inf.pred_final[i] == 1.0));
    CHECK((inf.pred_init[i] == 0.0 || inf.pred_init[i] == 1.0));
  }

  RunConfig plain = tiny_cfg();
  TransWcdModel cls_only(plain, 21);
  TransWcdModel::Inference inf2 = cls_only.infer(ds[1].pre, ds[1].post);
  CHECK_FALSE(inf2.dp_logits.defined());
  CHECK_FALSE(inf2.pred_final.defined());
}

TEST_CASE("load_params: full overwrite round trip and mismatch errors") {
  RunConfig cfg = tiny_cfg({{"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"}});
  TransWcdModel a(cfg, 1), b(cfg, 2);
  std::vector<ImagePair> ds = tiny_dataset(1, 9);

  std::vector<std::pair<std::string, Tensor>> named;
  for (const auto& [name, var] : a.params().entries()) named.emplace_back(name, var->value);
  b.load_params(named);
  TransWcdModel::Inference ia = a.infer(ds[0].pre, ds[0].post);
  TransWcdModel::Inference ib = b.infer(ds[0].pre, ds[0].post);
  CHECK(ia.p_cls == ib.p_cls);
  CHECK(bits_equal(ia.cam, ib.cam));
  CHECK(bits_equal(ia.dp_logits, ib.dp_logits));

  // Missing entry.
  std::vector<std::pair<std::string, Tensor>> missing(named.begin(), named.end() - 1);
  CHECK_THROWS_AS(b.load_params(missing), Error);
  // Unknown extra entry.
  auto extra = named;
  extra.emplace_back("no.such.param", Tensor::zeros({1}));
  CHECK_THROWS_AS(b.load_params(extra), Error);
  // Shape mismatch.
  auto bad = named;
  bad.front().second = Tensor::zeros({1, 2, 3});
  CHECK_THROWS_AS(b.load_params(bad), Error);
}

TEST_CASE("BatchSampler: seeded permutation epochs with wrap-around") {
  BatchSampler s1(10, 10, 77), s2(10, 10, 77);
  std::vector<i64> b1 = s1.next();
  std::vector<i64> sorted = b1;
  std::sort(sorted.begin(), sorted.end());
  for (i64 i = 0; i < 10; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  CHECK(b1 == s2.next());  // same seed, same order

  // Consecutive epochs reshuffle (these seeds do produce distinct orders).
  std::vector<i64> b2 = s1.next();
  CHECK(b1 != b2);
  std::vector<i64> sorted2 = b2;
  std::sort(sorted2.begin(), sorted2.end());
  CHECK(sorted == sorted2);

  // Batches straddle epoch boundaries without repeating within an epoch.
  BatchSampler s3(5, 3, 1);
  std::vector<i64> draws;
  for (int k = 0; k < 5; ++k) {
    for (i64 v : s3.next()) draws.push_back(v);
  }
  REQUIRE(draws.size() == 15);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::vector<i64> block(draws.begin() + epoch * 5, draws.begin() + (epoch + 1) * 5);
    std::sort(block.begin(), block.end());
    CHECK(block == std::vector<i64>{0, 1, 2, 3, 4});
  }

  CHECK_THROWS_AS(BatchSampler(0, 4, 1), ConfigError);
  CHECK_THROWS_AS(BatchSampler(4, 0, 1), ConfigError);
}

TEST_CASE("evaluate agrees with a hand-rolled loop and validates inputs") {
  RunConfig cfg = tiny_cfg({{"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"}});
  TransWcdModel model(cfg, 13);
  std::vector<ImagePair> ds = tiny_dataset(6, 17);

  for (const char* which : {"initial", "final"}) {
    CAPTURE(which);
    ConfusionCounts counts;
    i64 cls_correct = 0;
    for (const ImagePair& p : ds) {
      TransWcdModel::Inference inf = model.infer(p.pre, p.post);
      counts.accumulate(std::string(which) == "final" ? inf.pred_final : inf.pred_init, p.gt);
      if ((inf.p_cls >= 0.0 ? 1 : 0) == p.y_cls) ++cls_correct;
    }
    MetricsReport expect = finalize(counts);
    EvalResult res = evaluate(model, ds, which);
    CHECK(res.pixel.tp == expect.tp);
    CHECK(res.pixel.fp == expect.fp);
    CHECK(res.pixel.fn == expect.fn);
    CHECK(res.pixel.tn == expect.tn);
    CHECK(res.pixel.f1 == expect.f1);
    CHECK(res.pixel.precision == expect.precision);
    CHECK(res.pixel.recall == expect.recall);
    CHECK(res.pixel.oa == expect.oa);
    CHECK(res.pixel.iou == expect.iou);
    CHECK(res.cls_accuracy == static_cast<double>(cls_correct) / 6.0);
    CHECK(res.num_pairs == 6);
    CHECK(res.which == which);
  }

  CHECK_THROWS_AS(evaluate(model, ds, "bogus"), ConfigError);
  TransWcdModel no_decoder(tiny_cfg(), 13);
  CHECK_THROWS_AS(evaluate(no_decoder, ds, "final"), ConfigError);
  CHECK_THROWS_AS(evaluate(model, {}, "initial"), EmptyCounts);

  std::vector<ImagePair> no_gt = ds;
  no_gt[2].gt = Tensor();
  CHECK_THROWS_AS(evaluate(model, no_gt, "initial"), MissingGT);
}

TEST_CASE("run_training smoke: log structure per objective") {
  std::vector<ImagePair> ds = tiny_dataset(8);

  auto run = [&](const std::string& mode) {
    RunConfig cfg = tiny_cfg({{"model.mode", mode}, {"dp.start_iteration", "1"}});
    return run_training(cfg, ds);
  };

  SUBCASE("classifier only") {
    TrainOutcome out = run("transwcd");
    CHECK(out.iterations_run == 2);
    REQUIRE(out.log.size() == 2);
    for (const LogEntry& e : out.log) {
      CHECK_FALSE(e.l_cp.has_value());
      CHECK_FALSE(e.cp_weight.has_value());
      CHECK_FALSE(e.l_lg.has_value());
      CHECK(e.total == e.l_cc);
      CHECK(e.l_cc > 0.0);
    }
    REQUIRE(out.final_eval.has_value());
    CHECK(out.final_eval->which == "initial");
    CHECK(out.checkpoint.has_optimizer);
    CHECK(out.checkpoint.iteration == 2);
    // JSON log line carries exactly the active fields.
    nlohmann::json j = nlohmann::json::parse(out.log[0].to_json());
    CHECK(j.contains("iteration"));
    CHECK(j.contains("lr"));
    CHECK(j.contains("l_cc"));
    CHECK(j.contains("total"));
    CHECK_FALSE(j.contains("l_cp"));
    CHECK_FALSE(j.contains("l_lg"));
  }

  SUBCASE("decoder gated by its start iteration") {
    TrainOutcome out = run("transwcd_d");
    REQUIRE(out.log.size() == 2);
    // Before the gate: weight column says 0 and no decoder term exists.
    CHECK(out.log[0].cp_weight.has_value());
    CHECK(*out.log[0].cp_weight == 0.0);
    CHECK_FALSE(out.log[0].l_cp.has_value());
    CHECK(out.log[0].total == out.log[0].l_cc);
    // After: both appear and compose the total.
    REQUIRE(out.log[1].l_cp.has_value());
    CHECK(*out.log[1].cp_weight == 0.1);
    CHECK(out.log[1].total ==
          doctest::Approx(out.log[1].l_cc + 0.1 * *out.log[1].l_cp).epsilon(1e-12));
    CHECK(out.final_eval->which == "final");
  }

  SUBCASE("penalty without decoder") {
    TrainOutcome out = run("transwcd_l");
    REQUIRE(out.log.size() == 2);
    for (const LogEntry& e : out.log) {
      REQUIRE(e.l_lg.has_value());
      CHECK(*e.l_lg >= 0.0);
      CHECK_FALSE(e.cp_weight.has_value());
      CHECK_FALSE(e.l_cp.has_value());
      CHECK(e.total == doctest::Approx(e.l_cc + *e.l_lg).epsilon(1e-12));
    }
    CHECK(out.final_eval->which == "initial");
  }

  SUBCASE("full pipeline") {
    TrainOutcome out = run("transwcd_dl");
    REQUIRE(out.log.size() == 2);
    CHECK(*out.log[0].cp_weight == 0.0);
    REQUIRE(out.log[0].l_lg.has_value());  // penalty live from iteration 0
    REQUIRE(out.log[1].l_cp.has_value());
    CHECK(out.log[1].total == doctest::Approx(out.log[1].l_cc + 0.1 * *out.log[1].l_cp +
                                              *out.log[1].l_lg)
                                  .epsilon(1e-12));
    CHECK(out.final_eval->which == "final");
  }
}

TEST_CASE("run_training: bit-identical across runs with the same seed") {
  std::vector<ImagePair> ds = tiny_dataset(4, 23);
  const std::map<std::string, std::string> overrides = {
      {"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"},
      {"train.max_iterations", "3"}, {"data.augment", "true"},
  };
  TrainOutcome a = run_training(tiny_cfg(overrides), ds);
  TrainOutcome b = run_training(tiny_cfg(overrides), ds);

  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].iteration == b.log[i].iteration);
    CHECK(a.log[i].lr == b.log[i].lr);
    CHECK(a.log[i].l_cc == b.log[i].l_cc);
    CHECK(a.log[i].l_cp == b.log[i].l_cp);
    CHECK(a.log[i].l_lg == b.log[i].l_lg);
    CHECK(a.log[i].total == b.log[i].total);
  }
  REQUIRE(a.checkpoint.params.size() == b.checkpoint.params.size());
  for (std::size_t i = 0; i < a.checkpoint.params.size(); ++i) {
    CHECK(bits_equal(a.checkpoint.params[i].second, b.checkpoint.params[i].second));
  }

  auto diff_seed = overrides;
  diff_seed["train.seed"] = "43";
  TrainOutcome c = run_training(tiny_cfg(diff_seed), ds);
  CHECK(c.log[0].l_cc != a.log[0].l_cc);
}

TEST_CASE("checkpoint file round trip preserves inference bit-for-bit") {
  std::vector<ImagePair> ds = tiny_dataset(4, 29);
  RunConfig cfg = tiny_cfg({{"model.mode", "transwcd_dl"}, {"dp.start_iteration", "1"}});
  TrainOutcome out = run_training(cfg, ds);

  TransWcdModel direct = model_from_checkpoint(out.checkpoint);

  const fs::path dir = scratch_dir("ckpt");
  const std::string path = (dir / "model.wcd").string();
  save_checkpoint(path, out.checkpoint);
  TransWcdModel reloaded = model_from_checkpoint(load_checkpoint(path));

  TransWcdModel::Inference x = direct.infer(ds[0].pre, ds[0].post);
  TransWcdModel::Inference y = reloaded.infer(ds[0].pre, ds[0].post);
  CHECK(x.p_cls == y.p_cls);
  CHECK(bits_equal(x.cam, y.cam));
  CHECK(bits_equal(x.pred_init, y.pred_init));
  CHECK(bits_equal(x.dp_logits, y.dp_logits));
  CHECK(bits_equal(x.pred_final, y.pred_final));

  // The rebuilt model carries the training config (mode, scales, tau).
  CHECK(reloaded.has_decoder());
  CHECK(reloaded.config().mode == Mode::TranswcdDl);
  fs::remove_all(dir);
}

TEST_CASE("train_run writes config, log, checkpoint, and metrics artifacts") {
  const fs::path dir = scratch_dir("train_run");
  SynthSpec spec;
  spec.num_pairs = 4;
  spec.size = 32;
  spec.seed = 7;
  write_synthetic_dataset(spec, dir.string(), "train");
  SynthSpec vspec = spec;
  vspec.num_pairs = 2;
  vspec.seed = 8;
  write_synthetic_dataset(vspec, dir.string(), "val");

  RunConfig cfg = tiny_cfg({
      {"train.max_iterations", "4"},
      {"train.eval_interval", "2"},
      {"data.root", dir.string()},
      {"data.val_split", "val"},
      {"output.dir", (dir / "out").string()},
  });
  TrainOutcome out = train_run(cfg);
  CHECK(out.iterations_run == 4);
  // Evaluation uses the validation split when configured.
  REQUIRE(out.final_eval.has_value());
  CHECK(out.final_eval->num_pairs == 2);

  // config.ini is the serialization fixed point of the run config.
  std::ifstream cf(dir / "out" / "config.ini");
  std::stringstream cfs;
  cfs << cf.rdbuf();
  CHECK(cfs.str() == to_ini(cfg));
  CHECK_NOTHROW(make_run_config(parse_ini(cfs.str())));

  // Every log line is JSON; periodic evaluations are interleaved.
  std::ifstream lf(dir / "out" / "train_log.jsonl");
  std::string line;
  i64 log_lines = 0, eval_lines = 0;
  while (std::getline(lf, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    REQUIRE(j.contains("iteration"));
    if (j.contains("eval")) {
      ++eval_lines;
      CHECK(j["eval"].contains("f1"));
      CHECK(j["eval"].contains("cls_accuracy"));
      CHECK(j["eval"].contains("which"));
    } else {
      ++log_lines;
      CHECK(j.contains("l_cc"));
      CHECK(j.contains("total"));
    }
  }
  CHECK(log_lines == 4);
  CHECK(eval_lines == 1);  // at iteration 2; the end-of-run pass is separate

  CheckpointData ckpt = load_checkpoint((dir / "out" / "checkpoint.wcd").string());
  CHECK(ckpt.iteration == 4);
  CHECK(ckpt.has_optimizer);

  std::ifstream mf(dir / "out" / "metrics.json");
  nlohmann::json metrics = nlohmann::json::parse(mf);
  for (const char* key : {"f1", "precision", "recall", "oa", "iou", "cls_accuracy",
                          "num_pairs", "which", "iterations_run"}) {
    CAPTURE(key);
    CHECK(metrics.contains(key));
  }
  CHECK(metrics["num_pairs"] == 2);
  fs::remove_all(dir);
}

TEST_CASE("train_run: the evaluation hook can stop training early") {
  const fs::path dir = scratch_dir("early_stop");
  SynthSpec spec;
  spec.num_pairs = 4;
  spec.size = 32;
  spec.seed = 7;
  write_synthetic_dataset(spec, dir.string(), "train");

  RunConfig cfg = tiny_cfg({
      {"train.max_iterations", "10"},
      {"train.eval_interval", "2"},
      {"data.root", dir.string()},
      {"output.dir", (dir / "out").string()},
  });
  TrainHooks hooks;
  hooks.on_eval = [](i64, const EvalResult&) { return true; };
  TrainOutcome out = train_run(cfg, hooks);
  CHECK(out.stopped_early);
  CHECK(out.iterations_run == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep_alpha: validation plus a tiny end-to-end sweep") {
  RunConfig cfg = tiny_cfg();
  CHECK_THROWS_AS(sweep_alpha(cfg, {}, ""), ConfigError);
  CHECK_THROWS_AS(sweep_alpha(cfg, {0.5, 1.5}, ""), ConfigError);
  CHECK_THROWS_AS(sweep_alpha(cfg, {-0.1}, ""), ConfigError);

  const fs::path dir = scratch_dir("sweep");
  SynthSpec spec;
  spec.num_pairs = 4;
  spec.size = 32;
  spec.seed = 7;
  write_synthetic_dataset(spec, dir.string(), "train");

  RunConfig run = tiny_cfg({
      {"model.mode", "transwcd_l"},
      {"train.max_iterations", "3"},
      {"data.root", dir.string()},
      {"output.dir", (dir / "runs").string()},
  });
  const std::string csv_path = (dir / "alpha.csv").string();
  const std::string csv = sweep_alpha(run, {0.0, 0.5}, csv_path);

  std::istringstream ss(csv);
  std::string line;
  REQUIRE(std::getline(ss, line));
  CHECK(line == "alpha,f1,precision,recall,oa,iou");
  i64 rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    i64 commas = static_cast<i64>(std::count(line.begin(), line.end(), ','));
    CHECK(commas == 5);
    // Every field parses as a real number.
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) CHECK_NOTHROW((void)std::stod(field));
  }
  CHECK(rows == 2);

  std::ifstream written(csv_path);
  std::stringstream wss;
  wss << written.rdbuf();
  CHECK(wss.str() == csv);
  fs::remove_all(dir);
}
