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

#include "wcd/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "wcd/errors.hpp"
#include "wcd/png_io.hpp"

namespace fs = std::filesystem;

namespace wcd {

int derive_image_label(const Tensor& mask) {
  for (i64 i = 0; i < mask.numel(); ++i) {
    if (mask[i] > 0.5) return 1;
  }
  return 0;
}

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.num_pairs <= 0) throw ConfigError("synth: num_pairs must be positive");
  if (spec.size < 32 || spec.size % 32 != 0)
    throw ConfigError("synth: size must be a positive multiple of 32");
  if (spec.changed_ratio < 0.0 || spec.changed_ratio > 1.0)
    throw ConfigError("synth: changed_ratio must lie in [0,1]");
  if (spec.max_objects <= 0) throw ConfigError("synth: max_objects must be positive");
}

bool synth_pair_changed(const SynthSpec& spec, i64 index) {
  // Bresenham-style spreading: the number of changed pairs among the first k
  // is floor(k * ratio), so labels interleave instead of clumping.
  auto count = [&](i64 k) { return static_cast<i64>(std::floor(static_cast<double>(k) * spec.changed_ratio)); };
  return count(index + 1) > count(index);
}

namespace {

struct Rect {
  i64 y0, x0, h, w;
  double color[3];
};

Rect sample_rect(Rng& rng, i64 size, i64 min_side, i64 max_side) {
  Rect r;
  r.h = rng.uniform_int(min_side, max_side);
  r.w = rng.uniform_int(min_side, max_side);
  r.y0 = rng.uniform_int(0, size - r.h);
  r.x0 = rng.uniform_int(0, size - r.w);
  // Per-channel colors sit outside the background band [0.25,0.75], so a
  // rectangle always contrasts with the ground it covers.
  for (int c = 0; c < 3; ++c) {
    r.color[c] = rng.bernoulli(0.5) ? rng.uniform(0.8, 1.0) : rng.uniform(0.0, 0.2);
  }
  return r;
}

void draw_rect(Tensor& img, const Rect& r) {
  for (int c = 0; c < 3; ++c) {
    for (i64 y = r.y0; y < r.y0 + r.h; ++y) {
      for (i64 x = r.x0; x < r.x0 + r.w; ++x) img.at(c, y, x) = r.color[c];
    }
  }
}

Tensor sample_background(Rng& rng, i64 size) {
  // Smooth mid-band background from upsampled low-resolution noise.
  const i64 g = 4;
  Tensor coarse = Tensor::zeros({3, g, g});
  for (i64 i = 0; i < coarse.numel(); ++i) coarse[i] = rng.uniform(0.25, 0.75);
  return bilinear_resize(coarse, size, size);
}

}  // namespace

ImagePair make_synthetic_pair(const SynthSpec& spec, i64 index) {
  validate_synth_spec(spec);
  if (index < 0 || index >= spec.num_pairs) throw RangeError("synth: pair index out of range");
  Rng rng = derive_rng(spec.seed, "synth", static_cast<std::uint64_t>(index));
  const i64 size = spec.size;
  const bool changed = synth_pair_changed(spec, index);

  ImagePair pair;
  {
    std::ostringstream name;
    name << "pair_" << std::setw(5) << std::setfill('0') << index;
    pair.id = name.str();
  }

  Tensor pre = sample_background(rng, size);

  // Scene objects shared by both timestamps; unchanged pairs always carry at
  // least one so "contains a rectangle" is not a usable change cue.
  const i64 n_shared = changed ? rng.uniform_int(0, 2) : rng.uniform_int(1, 3);
  const i64 shared_lo = std::max<i64>(2, size / 8);
  const i64 shared_hi = std::max(shared_lo + 1, size / 4);
  for (i64 i = 0; i < n_shared; ++i) draw_rect(pre, sample_rect(rng, size, shared_lo, shared_hi));

  Tensor post = pre;
  Tensor gt = Tensor::zeros({size, size});

  if (changed) {
    // Change = rectangles present in exactly one timestamp, painted last so
    // the ground truth is the exact pixel footprint of the edits.
    const i64 n_changed = rng.uniform_int(1, spec.max_objects);
    const i64 lo = std::max<i64>(4, size * 3 / 8);
    const i64 hi = std::max(lo + 1, size * 5 / 8);
    for (i64 i = 0; i < n_changed; ++i) {
      Rect r = sample_rect(rng, size, lo, hi);
      const bool added = rng.bernoulli(0.5);
      draw_rect(added ? post : pre, r);
      for (i64 y = r.y0; y < r.y0 + r.h; ++y)
        for (i64 x = r.x0; x < r.x0 + r.w; ++x) gt.at(y, x) = 1.0;
    }
    pair.y_cls = 1;
  } else {
    // Identical scene, photometric jitter only: global brightness shift plus
    // low-amplitude pixel noise, clamped back into [0,1].
    const double shift = rng.uniform(-0.05, 0.05);
    const double sigma = rng.uniform(0.005, 0.02);
    for (i64 i = 0; i < post.numel(); ++i) {
      post[i] = std::clamp(post[i] + shift + rng.normal(0.0, sigma), 0.0, 1.0);
    }
    pair.y_cls = 0;
  }

  pair.pre = std::move(pre);
  pair.post = std::move(post);
  pair.gt = std::move(gt);
  return pair;
}

std::vector<ImagePair> make_synthetic_dataset(const SynthSpec& spec) {
  validate_synth_spec(spec);
  std::vector<ImagePair> out;
  out.reserve(static_cast<std::size_t>(spec.num_pairs));
  for (i64 i = 0; i < spec.num_pairs; ++i) out.push_back(make_synthetic_pair(spec, i));
  return out;
}

void write_synthetic_dataset(const SynthSpec& spec, const std::string& root,
                             const std::string& split) {
  const fs::path base = fs::path(root) / split;
  fs::create_directories(base / "A");
  fs::create_directories(base / "B");
  fs::create_directories(base / "label");
  for (i64 i = 0; i < spec.num_pairs; ++i) {
    ImagePair pair = make_synthetic_pair(spec, i);
    const std::string file = pair.id + ".png";
    write_image_rgb((base / "A" / file).string(), pair.pre);
    write_image_rgb((base / "B" / file).string(), pair.post);
    Tensor mask = pair.gt;
    for (i64 k = 0; k < mask.numel(); ++k) mask[k] = mask[k] > 0.5 ? 255.0 : 0.0;
    write_image_gray((base / "label" / file).string(), mask);
  }
}

namespace {

std::vector<std::string> list_pngs(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string stem_of(const std::string& name) {
  return fs::path(name).stem().string();
}

std::map<std::string, int> read_labels_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LabelError("cannot open labels file: " + path.string());
  std::map<std::string, int> labels;
  std::string line;
  i64 lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name;
    int value = -1;
    if (!(ss >> name >> value) || (value != 0 && value != 1)) {
      throw LabelError("malformed labels line " + std::to_string(lineno) + " in " + path.string());
    }
    labels[stem_of(name)] = value;
  }
  return labels;
}

}  // namespace

std::vector<ImagePair> load_pair_dataset(const std::string& root, const std::string& split) {
  const fs::path base = fs::path(root) / split;
  const fs::path dir_a = base / "A";
  const fs::path dir_b = base / "B";
  if (!fs::is_directory(dir_a) || !fs::is_directory(dir_b)) {
    throw LayoutError("expected " + (base / "A").string() + " and " + (base / "B").string());
  }
  const auto names_a = list_pngs(dir_a);
  const auto names_b = list_pngs(dir_b);
  if (names_a.empty()) throw LayoutError("no .png files under " + dir_a.string());
  if (names_a != names_b) {
    throw LayoutError("A/ and B/ filename sets differ under " + base.string());
  }

  const fs::path dir_label = base / "label";
  const bool have_masks = fs::is_directory(dir_label);
  std::map<std::string, int> labels;
  if (!have_masks) {
    const fs::path labels_txt = base / "labels.txt";
    if (!fs::is_regular_file(labels_txt)) {
      throw LabelError("no label/ directory and no labels.txt under " + base.string());
    }
    labels = read_labels_file(labels_txt);
  }

  std::vector<ImagePair> out;
  out.reserve(names_a.size());
  for (const auto& name : names_a) {
    ImagePair pair;
    pair.id = stem_of(name);
    pair.pre = read_image_rgb((dir_a / name).string());
    pair.post = read_image_rgb((dir_b / name).string());
    if (!pair.pre.same_shape(pair.post)) {
      throw LayoutError("pre/post size mismatch for pair " + pair.id);
    }
    if (have_masks) {
      const fs::path mask_path = dir_label / name;
      if (!fs::is_regular_file(mask_path)) {
        throw LayoutError("missing mask " + mask_path.string());
      }
      Tensor raw = read_image_gray(mask_path.string());
      if (raw.size(0) != pair.pre.size(1) || raw.size(1) != pair.pre.size(2)) {
        throw LayoutError("mask size mismatch for pair " + pair.id);
      }
      Tensor gt = Tensor::zeros(raw.shape());
      for (i64 i = 0; i < raw.numel(); ++i) gt[i] = raw[i] > 127.0 ? 1.0 : 0.0;
      pair.y_cls = derive_image_label(gt);
      pair.gt = std::move(gt);
    } else {
      auto it = labels.find(pair.id);
      if (it == labels.end()) throw LabelError("no label for pair " + pair.id);
      pair.y_cls = it->second;
    }
    out.push_back(std::move(pair));
  }
  return out;
}

// ====== paired augmentation ======

AugDraw sample_aug_draw(Rng& rng, const AugmentConfig& cfg) {
  if (!cfg.enabled) return AugDraw::identity();
  if (cfg.scale_min <= 0.0 || cfg.scale_max < cfg.scale_min)
    throw ConfigError("augment: scale range must satisfy 0 < min <= max");
  if (cfg.flip_prob < 0.0 || cfg.flip_prob > 1.0)
    throw ConfigError("augment: flip_prob must lie in [0,1]");
  AugDraw d;
  d.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  d.flip = rng.bernoulli(cfg.flip_prob);
  d.u_crop_y = rng.uniform();
  d.u_crop_x = rng.uniform();
  return d;
}

namespace {

// Symmetric reflection of index i into [0, n): ... 1 0 | 0 1 ... n-1 | n-1 ...
i64 reflect_index(i64 i, i64 n) {
  if (n == 1) return 0;
  const i64 period = 2 * n;
  i64 m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

i64 crop_offset(double u, i64 scaled, i64 out) {
  const i64 lo = std::min<i64>(0, scaled - out);
  const i64 hi = std::max<i64>(0, scaled - out);
  i64 off = lo + static_cast<i64>(std::floor(u * static_cast<double>(hi - lo + 1)));
  return std::clamp(off, lo, hi);
}

}  // namespace

Tensor apply_geometric(const Tensor& img, const AugDraw& draw, i64 out_h, i64 out_w, bool mask) {
  if (img.ndim() != 2 && img.ndim() != 3)
    throw ShapeMismatch("apply_geometric expects (H,W) or (C,H,W)");
  if (out_h <= 0 || out_w <= 0) throw RangeError("apply_geometric: output size must be positive");
  const bool chw = img.ndim() == 3;
  const i64 ch = chw ? img.size(0) : 1;
  const i64 in_h = img.size(chw ? 1 : 0);
  const i64 in_w = img.size(chw ? 2 : 1);

  const i64 sh = std::max<i64>(1, static_cast<i64>(std::llround(static_cast<double>(in_h) * draw.scale)));
  const i64 sw = std::max<i64>(1, static_cast<i64>(std::llround(static_cast<double>(in_w) * draw.scale)));
  Tensor scaled = mask ? nearest_resize(img, sh, sw) : bilinear_resize(img, sh, sw);

  const i64 off_y = crop_offset(draw.u_crop_y, sh, out_h);
  const i64 off_x = crop_offset(draw.u_crop_x, sw, out_w);

  Tensor out = Tensor::zeros(chw ? Shape{ch, out_h, out_w} : Shape{out_h, out_w});
  for (i64 c = 0; c < ch; ++c) {
    for (i64 y = 0; y < out_h; ++y) {
      const i64 sy = reflect_index(off_y + y, sh);
      for (i64 x = 0; x < out_w; ++x) {
        i64 sx = reflect_index(off_x + x, sw);
        if (draw.flip) sx = sw - 1 - sx;
        const double v = chw ? scaled.at(c, sy, sx) : scaled.at(sy, sx);
        double& dst = chw ? out.at(c, y, x) : out.at(y, x);
        dst = mask ? v : std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImagePair augment_pair(const ImagePair& pair, const AugmentConfig& cfg, Rng& rng) {
  if (!cfg.enabled) return pair;
  const i64 out = cfg.out_size;

  auto apply = [&](const AugDraw& d) {
    ImagePair res;
    res.id = pair.id;
    res.pre = apply_geometric(pair.pre, d, out, out, false);
    res.post = apply_geometric(pair.post, d, out, out, false);
    if (pair.has_gt()) {
      res.gt = apply_geometric(pair.gt, d, out, out, true);
      res.y_cls = derive_image_label(res.gt);
    } else {
      res.y_cls = pair.y_cls;
    }
    return res;
  };

  if (pair.has_gt() || pair.y_cls == 0) return apply(sample_aug_draw(rng, cfg));

  // Changed pair with no mask: the label cannot be re-derived, so reject
  // crops that lose every visibly changed pixel; give up after 8 draws.
  for (int attempt = 0; attempt < 8; ++attempt) {
    ImagePair res = apply(sample_aug_draw(rng, cfg));
    double max_diff = 0.0;
    for (i64 i = 0; i < res.pre.numel(); ++i) {
      max_diff = std::max(max_diff, std::abs(res.pre[i] - res.post[i]));
    }
    if (max_diff > 1e-6) return res;
  }
  return pair;
}

}  // namespace wcd
