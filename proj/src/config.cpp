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

#include "wcd/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strip a trailing comment introduced by a whitespace-preceded '#' or ';'.
std::string strip_comment(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((s[i] == '#' || s[i] == ';') &&
        (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1])))) {
      return s.substr(0, i);
    }
  }
  return s;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a real number, got '" + v + "'");
  }
}

i64 parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    i64 x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an unsigned integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + key + " expects a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split_list(v)) out.push_back(parse_real(key, p));
  if (out.empty()) throw ConfigError("config: " + key + " expects a non-empty list");
  return out;
}

std::vector<i64> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<i64> out;
  for (const auto& p : split_list(v)) out.push_back(parse_int(key, p));
  if (out.empty()) throw ConfigError("config: " + key + " expects a non-empty list");
  return out;
}

std::string fmt_real(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

template <typename T>
std::string fmt_list(const std::vector<T>& xs) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) ss << ",";
    if constexpr (std::is_same_v<T, double>) {
      ss << fmt_real(xs[i]);
    } else {
      ss << xs[i];
    }
  }
  return ss.str();
}

}  // namespace

KeyValues parse_ini(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line, section;
  i64 lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("config: bad section header at line " + std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key=value at line " + std::to_string(lineno));
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
    // Keys inside a [section] are section.key; dotted keys pass through so a
    // section-less file with fully qualified names also parses.
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    kv[key] = value;
  }
  return kv;
}

KeyValues load_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

RunConfig make_run_config(const KeyValues& kv) {
  RunConfig cfg;
  bool preset_seen = false;

  // Preset first so later encoder.* keys override its fields regardless of
  // the map's alphabetical order.
  if (auto it = kv.find("encoder.preset"); it != kv.end()) {
    preset_seen = true;
    if (it->second == "desk_tiny") {
      cfg.encoder = EncoderConfig::desk_tiny();
    } else if (it->second == "mit_b1") {
      cfg.encoder = EncoderConfig::mit_b1();
    } else {
      throw ConfigError("config: unknown encoder.preset '" + it->second + "'");
    }
    cfg.encoder_preset = it->second;
  }

  for (const auto& [key, value] : kv) {
    if (key == "model.mode") {
      cfg.mode = parse_mode(value);
    } else if (key == "model.stream") {
      cfg.stream = parse_stream(value);
    } else if (key == "model.difference") {
      cfg.difference = parse_diff_kind(value);
      cfg.difference_set = true;
    } else if (key == "encoder.preset") {
      // handled above
    } else if (key == "encoder.embed_dims") {
      cfg.encoder.embed_dims = parse_int_list(key, value);
    } else if (key == "encoder.depths") {
      cfg.encoder.depths = parse_int_list(key, value);
    } else if (key == "encoder.num_heads") {
      cfg.encoder.num_heads = parse_int_list(key, value);
    } else if (key == "encoder.sr_ratios") {
      cfg.encoder.sr_ratios = parse_int_list(key, value);
    } else if (key == "encoder.mlp_ratio") {
      cfg.encoder.mlp_ratio = parse_int(key, value);
    } else if (key == "encoder.drop_rate") {
      cfg.encoder.drop_rate = parse_real(key, value);
    } else if (key == "cam.scales") {
      cfg.cam_scales = parse_real_list(key, value);
    } else if (key == "cam.tau") {
      cfg.tau = parse_real(key, value);
    } else if (key == "cam.eps_norm") {
      cfg.eps_norm = parse_real(key, value);
    } else if (key == "dp.rates") {
      cfg.dp.rates = parse_int_list(key, value);
    } else if (key == "dp.branch_channels") {
      cfg.dp.branch_channels = parse_int(key, value);
    } else if (key == "dp.start_iteration") {
      cfg.dp.start_iteration = parse_int(key, value);
    } else if (key == "lg.alpha") {
      cfg.lg.alpha = parse_real(key, value);
      cfg.lg_alpha_set = true;
    } else if (key == "lg.mode") {
      cfg.lg.mode = parse_lg_mode(value);
    } else if (key == "lg.mask_source") {
      cfg.lg.mask_source = parse_mask_source(value);
      cfg.lg_mask_source_set = true;
    } else if (key == "loss.epsilon_cp") {
      cfg.epsilon_cp = parse_real(key, value);
    } else if (key == "train.base_lr") {
      cfg.base_lr = parse_real(key, value);
    } else if (key == "train.head_lr_mult") {
      cfg.head_lr_mult = parse_real(key, value);
    } else if (key == "train.max_iterations") {
      cfg.max_iterations = parse_int(key, value);
    } else if (key == "train.warmup_iterations") {
      cfg.warmup_iterations = parse_int(key, value);
    } else if (key == "train.poly_power") {
      cfg.poly_power = parse_real(key, value);
    } else if (key == "train.batch_size") {
      cfg.batch_size = parse_int(key, value);
    } else if (key == "train.weight_decay") {
      cfg.weight_decay = parse_real(key, value);
    } else if (key == "train.seed") {
      cfg.seed = parse_u64(key, value);
    } else if (key == "train.eval_interval") {
      cfg.eval_interval = parse_int(key, value);
    } else if (key == "train.log_interval") {
      cfg.log_interval = parse_int(key, value);
    } else if (key == "data.root") {
      cfg.data_root = value;
    } else if (key == "data.train_split") {
      cfg.train_split = value;
    } else if (key == "data.val_split") {
      cfg.val_split = value;
    } else if (key == "data.crop_size") {
      cfg.crop_size = parse_int(key, value);
    } else if (key == "data.augment") {
      cfg.augment = parse_bool(key, value);
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  (void)preset_seen;

  // Mode-dependent defaults when the key was not given explicitly.
  if (!cfg.difference_set) cfg.difference = default_diff_kind(cfg.stream);
  if (!cfg.lg_alpha_set) cfg.lg.alpha = (cfg.mode == Mode::TranswcdL) ? 0.5 : 0.2;
  if (!cfg.lg_mask_source_set) {
    cfg.lg.mask_source = (cfg.mode == Mode::TranswcdL) ? LgConfig::MaskSource::Init
                                                       : LgConfig::MaskSource::Final;
  }

  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  validate_encoder_config(cfg.encoder);
  validate_difference(cfg.stream, cfg.difference);
  validate_dp_config(cfg.dp);
  validate_lg_config(cfg.lg);
  if (cfg.cam_scales.empty()) throw ConfigError("config: cam.scales must be non-empty");
  for (double s : cfg.cam_scales) {
    if (!(s > 0.0)) throw ConfigError("config: cam.scales entries must be positive");
  }
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw ConfigError("config: cam.tau must lie in (0,1)");
  if (!(cfg.eps_norm > 0.0)) throw ConfigError("config: cam.eps_norm must be positive");
  if (cfg.epsilon_cp < 0.0) throw ConfigError("config: loss.epsilon_cp must be non-negative");
  if (!(cfg.base_lr > 0.0)) throw ConfigError("config: train.base_lr must be positive");
  if (!(cfg.head_lr_mult > 0.0)) throw ConfigError("config: train.head_lr_mult must be positive");
  if (cfg.max_iterations <= 0) throw ConfigError("config: train.max_iterations must be positive");
  if (cfg.warmup_iterations < 0 || cfg.warmup_iterations >= cfg.max_iterations) {
    throw ConfigError("config: require 0 <= warmup_iterations < max_iterations");
  }
  if (!(cfg.poly_power > 0.0)) throw ConfigError("config: train.poly_power must be positive");
  if (cfg.batch_size <= 0) throw ConfigError("config: train.batch_size must be positive");
  if (cfg.weight_decay < 0.0) throw ConfigError("config: train.weight_decay must be non-negative");
  if (cfg.eval_interval < 0) throw ConfigError("config: train.eval_interval must be non-negative");
  if (cfg.log_interval <= 0) throw ConfigError("config: train.log_interval must be positive");
  if (cfg.crop_size < 32 || cfg.crop_size % 32 != 0) {
    throw ConfigError("config: data.crop_size must be a positive multiple of 32");
  }
  if (mode_has_lg(cfg.mode) && !mode_has_decoder(cfg.mode) &&
      cfg.lg.mode == LgConfig::Mode::Smooth) {
    throw ConfigError("config: lg.mode=smooth relaxes the decoder logit map, "
                      "so it needs a decoder-bearing model.mode");
  }
}

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream ss;
  ss << "[model]\n";
  ss << "mode = " << mode_name(cfg.mode) << "\n";
  ss << "stream = " << stream_name(cfg.stream) << "\n";
  ss << "difference = " << diff_kind_name(cfg.difference) << "\n";
  ss << "\n[encoder]\n";
  ss << "preset = " << cfg.encoder_preset << "\n";
  ss << "embed_dims = " << fmt_list(cfg.encoder.embed_dims) << "\n";
  ss << "depths = " << fmt_list(cfg.encoder.depths) << "\n";
  ss << "num_heads = " << fmt_list(cfg.encoder.num_heads) << "\n";
  ss << "sr_ratios = " << fmt_list(cfg.encoder.sr_ratios) << "\n";
  ss << "mlp_ratio = " << cfg.encoder.mlp_ratio << "\n";
  ss << "drop_rate = " << fmt_real(cfg.encoder.drop_rate) << "\n";
  ss << "\n[cam]\n";
  ss << "scales = " << fmt_list(cfg.cam_scales) << "\n";
  ss << "tau = " << fmt_real(cfg.tau) << "\n";
  ss << "eps_norm = " << fmt_real(cfg.eps_norm) << "\n";
  ss << "\n[dp]\n";
  ss << "rates = " << fmt_list(cfg.dp.rates) << "\n";
  ss << "branch_channels = " << cfg.dp.branch_channels << "\n";
  ss << "start_iteration = " << cfg.dp.start_iteration << "\n";
  ss << "\n[lg]\n";
  ss << "alpha = " << fmt_real(cfg.lg.alpha) << "\n";
  ss << "mode = " << lg_mode_name(cfg.lg.mode) << "\n";
  ss << "mask_source = " << mask_source_name(cfg.lg.mask_source) << "\n";
  ss << "\n[loss]\n";
  ss << "epsilon_cp = " << fmt_real(cfg.epsilon_cp) << "\n";
  ss << "\n[train]\n";
  ss << "base_lr = " << fmt_real(cfg.base_lr) << "\n";
  ss << "head_lr_mult = " << fmt_real(cfg.head_lr_mult) << "\n";
  ss << "max_iterations = " << cfg.max_iterations << "\n";
  ss << "warmup_iterations = " << cfg.warmup_iterations << "\n";
  ss << "poly_power = " << fmt_real(cfg.poly_power) << "\n";
  ss << "batch_size = " << cfg.batch_size << "\n";
  ss << "weight_decay = " << fmt_real(cfg.weight_decay) << "\n";
  ss << "seed = " << cfg.seed << "\n";
  ss << "eval_interval = " << cfg.eval_interval << "\n";
  ss << "log_interval = " << cfg.log_interval << "\n";
  ss << "\n[data]\n";
  ss << "root = " << cfg.data_root << "\n";
  ss << "train_split = " << cfg.train_split << "\n";
  ss << "val_split = " << cfg.val_split << "\n";
  ss << "crop_size = " << cfg.crop_size << "\n";
  ss << "augment = " << (cfg.augment ? "true" : "false") << "\n";
  ss << "\n[output]\n";
  ss << "dir = " << cfg.output_dir << "\n";
  return ss.str();
}

}  // namespace wcd
