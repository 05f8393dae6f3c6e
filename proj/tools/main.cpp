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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wcd/checkpoint.hpp"
#include "wcd/config.hpp"
#include "wcd/data.hpp"
#include "wcd/errors.hpp"
#include "wcd/png_io.hpp"
#include "wcd/trainer.hpp"

namespace {

wcd::KeyValues overlay_sets(wcd::KeyValues kv, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw wcd::ConfigError("--set expects key=value, got '" + s + "'");
    }
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return kv;
}

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw wcd::ConfigError("--alphas expects a comma-separated list");
  return out;
}

int cmd_gen_synth(const std::string& out_dir, const std::string& split, wcd::i64 num,
                  wcd::i64 size, std::uint64_t seed, double ratio, wcd::i64 max_objects) {
  wcd::SynthSpec spec;
  spec.num_pairs = num;
  spec.size = size;
  spec.seed = seed;
  spec.changed_ratio = ratio;
  spec.max_objects = max_objects;
  wcd::write_synthetic_dataset(spec, out_dir, split);
  wcd::i64 changed = 0;
  for (wcd::i64 i = 0; i < num; ++i) changed += wcd::synth_pair_changed(spec, i) ? 1 : 0;
  std::cout << "wrote " << num << " pairs (" << changed << " changed) under " << out_dir << "/"
            << split << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets) {
  wcd::KeyValues kv = overlay_sets(wcd::load_ini_file(config_path), sets);
  wcd::RunConfig cfg = wcd::make_run_config(kv);
  wcd::TrainHooks hooks;
  hooks.on_log = [](const wcd::LogEntry& e) { std::cout << e.to_json() << "\n"; };
  hooks.on_eval = [](wcd::i64 iteration, const wcd::EvalResult& res) {
    std::cout << "eval @" << iteration << ": cls_acc=" << res.cls_accuracy
              << " f1=" << res.pixel.f1 << " (" << res.which << ")\n";
    return false;
  };
  wcd::TrainOutcome outcome = wcd::train_run(cfg, hooks);
  std::cout << "finished " << outcome.iterations_run << " iterations; outputs in "
            << cfg.output_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_root,
             const std::string& split, const std::string& out_path, std::string which) {
  wcd::CheckpointData data = wcd::load_checkpoint(ckpt_path);
  wcd::TransWcdModel model = wcd::model_from_checkpoint(data);
  std::vector<wcd::ImagePair> pairs = wcd::load_pair_dataset(data_root, split);
  if (which.empty()) which = model.has_decoder() ? "final" : "initial";
  wcd::EvalResult res = wcd::evaluate(model, pairs, which);

  nlohmann::ordered_json j = nlohmann::ordered_json::parse(wcd::metrics_to_json(res.pixel));
  j["cls_accuracy"] = res.cls_accuracy;
  j["num_pairs"] = res.num_pairs;
  j["which"] = res.which;
  std::filesystem::path out(out_path);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out);
  if (!f) throw wcd::Error("eval: cannot write " + out_path);
  f << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& pre_path,
                const std::string& post_path, const std::string& mask_path,
                const std::string& cam_path) {
  wcd::CheckpointData data = wcd::load_checkpoint(ckpt_path);
  wcd::TransWcdModel model = wcd::model_from_checkpoint(data);
  wcd::Tensor pre = wcd::read_image_rgb(pre_path);
  wcd::Tensor post = wcd::read_image_rgb(post_path);
  wcd::TransWcdModel::Inference inf = model.infer(pre, post);

  const wcd::Tensor& mask = model.has_decoder() ? inf.pred_final : inf.pred_init;
  wcd::Tensor mask_img = wcd::Tensor::zeros(mask.shape());
  for (wcd::i64 i = 0; i < mask.numel(); ++i) mask_img[i] = mask[i] > 0.5 ? 255.0 : 0.0;
  wcd::write_image_gray(mask_path, mask_img);

  if (!cam_path.empty()) {
    wcd::Tensor cam_img = wcd::Tensor::zeros(inf.cam.shape());
    for (wcd::i64 i = 0; i < inf.cam.numel(); ++i) {
      cam_img[i] = std::round(255.0 * inf.cam[i]);
    }
    wcd::write_image_gray(cam_path, cam_img);
  }
  std::cout << "p_cls=" << inf.p_cls << " mask=" << mask_path << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& alphas_text,
              const std::string& out_csv, const std::vector<std::string>& sets) {
  wcd::KeyValues kv = overlay_sets(wcd::load_ini_file(config_path), sets);
  wcd::RunConfig cfg = wcd::make_run_config(kv);
  const std::vector<double> alphas = parse_alpha_list(alphas_text);
  const std::string csv = wcd::sweep_alpha(cfg, alphas, out_csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-supervised change detection from image-level labels"};
  app.require_subcommand(1);

  // gen-synth
  std::string gs_out, gs_split = "train";
  wcd::i64 gs_num = 128, gs_size = 64, gs_max_objects = 3;
  std::uint64_t gs_seed = 7;
  double gs_ratio = 0.5;
  auto* gen = app.add_subcommand("gen-synth", "Write a synthetic bi-temporal dataset");
  gen->add_option("--out", gs_out, "Dataset root directory")->required();
  gen->add_option("--split", gs_split, "Split name (default train)");
  gen->add_option("--num", gs_num, "Number of pairs");
  gen->add_option("--size", gs_size, "Image side (multiple of 32)");
  gen->add_option("--seed", gs_seed, "Generator seed");
  gen->add_option("--changed-ratio", gs_ratio, "Fraction of changed pairs");
  gen->add_option("--max-objects", gs_max_objects, "Max changed rectangles per pair");

  // train
  std::string tr_config;
  std::vector<std::string> tr_sets;
  auto* train = app.add_subcommand("train", "Train per config file");
  train->add_option("--config", tr_config, "INI config file")->required();
  train->add_option("--set", tr_sets, "Override section.key=value (repeatable)");

  // eval
  std::string ev_ckpt, ev_data, ev_split = "train", ev_out = "metrics.json", ev_which;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  eval->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  eval->add_option("--data", ev_data, "Dataset root")->required();
  eval->add_option("--split", ev_split, "Split name");
  eval->add_option("--out", ev_out, "Metrics JSON output path");
  eval->add_option("--which", ev_which, "Mask choice: initial|final (default: per model)");

  // predict
  std::string pr_ckpt, pr_pre, pr_post, pr_mask, pr_cam;
  auto* predict = app.add_subcommand("predict", "Predict a change mask for one pair");
  predict->add_option("--checkpoint", pr_ckpt, "Checkpoint file")->required();
  predict->add_option("--pre", pr_pre, "Earlier image (PNG)")->required();
  predict->add_option("--post", pr_post, "Later image (PNG)")->required();
  predict->add_option("--out-mask", pr_mask, "Binary mask output PNG")->required();
  predict->add_option("--out-cam", pr_cam, "Fused activation map output PNG");

  // sweep-alpha
  std::string sw_config, sw_alphas, sw_out;
  std::vector<std::string> sw_sets;
  auto* sweep = app.add_subcommand("sweep-alpha", "Train once per penalty weight");
  sweep->add_option("--config", sw_config, "INI config file")->required();
  sweep->add_option("--alphas", sw_alphas, "Comma-separated weights in [0,1]")->required();
  sweep->add_option("--out", sw_out, "CSV output path")->required();
  sweep->add_option("--set", sw_sets, "Override section.key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen_synth(gs_out, gs_split, gs_num, gs_size, gs_seed, gs_ratio, gs_max_objects);
    }
    if (train->parsed()) return cmd_train(tr_config, tr_sets);
    if (eval->parsed()) return cmd_eval(ev_ckpt, ev_data, ev_split, ev_out, ev_which);
    if (predict->parsed()) return cmd_predict(pr_ckpt, pr_pre, pr_post, pr_mask, pr_cam);
    if (sweep->parsed()) return cmd_sweep(sw_config, sw_alphas, sw_out, sw_sets);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
