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

#ifndef WCD_CONFIG_HPP_
#define WCD_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wcd/difference.hpp"
#include "wcd/dp_decoder.hpp"
#include "wcd/encoder.hpp"
#include "wcd/lg_constraint.hpp"
#include "wcd/objective.hpp"

namespace wcd {

/// Everything one run needs, resolved from an INI file plus overrides.
struct RunConfig {
  // [model]
  Mode mode = Mode::Transwcd;
  Stream stream = Stream::Single;
  DiffKind difference = DiffKind::Conv1x1NoAct;
  bool difference_set = false;  // explicit key beats the per-stream default

  // [encoder]
  std::string encoder_preset = "desk_tiny";
  EncoderConfig encoder = EncoderConfig::desk_tiny();

  // [cam]
  std::vector<double> cam_scales{0.5, 1.0, 1.5, 2.0};
  double tau = 0.45;
  double eps_norm = 1e-5;

  // [dp]
  DpConfig dp;

  // [lg]
  LgConfig lg;
  bool lg_alpha_set = false;        // explicit key beats the per-mode default
  bool lg_mask_source_set = false;

  // [loss]
  double epsilon_cp = 0.1;

  // [train]
  double base_lr = 5e-5;
  double head_lr_mult = 10.0;
  i64 max_iterations = 30000;
  i64 warmup_iterations = 1500;
  double poly_power = 0.9;
  i64 batch_size = 8;
  double weight_decay = 0.01;
  std::uint64_t seed = 42;
  i64 eval_interval = 0;  // 0 = final evaluation only
  i64 log_interval = 50;

  // [data]
  std::string data_root;
  std::string train_split = "train";
  std::string val_split;  // empty = evaluate on the training split
  i64 crop_size = 64;
  bool augment = true;

  // [output]
  std::string output_dir = "runs/exp";
};

/// Flat "section.key" → raw value map, the exchange format between the INI
/// file, --set overrides, and RunConfig.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_ini(const std::string& text);        // ConfigError on bad syntax
KeyValues load_ini_file(const std::string& path);    // ConfigError if unreadable

/// Apply "section.key=value" entries on top of defaults. Unknown keys and
/// unparsable values throw ConfigError. Mode-dependent defaults (lg.alpha,
/// lg.mask_source, model.difference) resolve after all keys are applied.
RunConfig make_run_config(const KeyValues& kv);

/// Every key with its resolved value, suitable to write beside run outputs;
/// make_run_config(parse_ini(to_ini(cfg))) reproduces cfg exactly.
std::string to_ini(const RunConfig& cfg);

/// Consistency checks across sections (crop size vs encoder, scale list
/// non-empty and positive, batch/iteration counts positive, ...).
void validate_run_config(const RunConfig& cfg);

}  // namespace wcd

#endif  // WCD_CONFIG_HPP_
