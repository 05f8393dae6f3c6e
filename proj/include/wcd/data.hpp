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

#ifndef WCD_DATA_HPP_
#define WCD_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wcd/rng.hpp"
#include "wcd/tensor.hpp"

namespace wcd {

/// One bi-temporal sample: two (3,H,W) images in [0,1], an image-level
/// changed/unchanged label, and optionally a pixel ground-truth mask.
struct ImagePair {
  std::string id;
  Tensor pre, post;
  int y_cls = 0;
  Tensor gt;  // (H,W) of 0/1; undefined when absent
  bool has_gt() const { return gt.defined(); }
};

/// 1 iff any pixel of the mask exceeds 0.5. Expects 0/1 masks; the dataset
/// loader binarizes raw 8-bit masks (>127) before labels are derived.
int derive_image_label(const Tensor& mask);

struct SynthSpec {
  i64 num_pairs = 128;
  i64 size = 64;
  double changed_ratio = 0.5;
  std::uint64_t seed = 7;
  i64 max_objects = 3;
};
void validate_synth_spec(const SynthSpec& spec);  // ConfigError

/// Whether pair `index` of `num_pairs` is a changed pair: labels are spread
/// evenly so every prefix holds about changed_ratio changed pairs.
bool synth_pair_changed(const SynthSpec& spec, i64 index);

/// Deterministic synthetic pair: rectangles appear or disappear between the
/// two timestamps of a changed pair (gt = exact footprint of those
/// rectangles); unchanged pairs repeat the same scene with a small photometric
/// jitter. All draws come from a stream derived from (seed, index).
ImagePair make_synthetic_pair(const SynthSpec& spec, i64 index);

std::vector<ImagePair> make_synthetic_dataset(const SynthSpec& spec);

/// Write a synthetic dataset in the directory layout below.
void write_synthetic_dataset(const SynthSpec& spec, const std::string& root,
                             const std::string& split);

/// Load pairs from root/split/{A,B,label}/<name>.png in lexicographic name
/// order. When label/ is missing, image labels come from root/split/labels.txt
/// (lines "<name> <0|1>", name with or without extension) and gt is absent.
/// Throws LayoutError on A/B mismatch, LabelError when no label source exists.
std::vector<ImagePair> load_pair_dataset(const std::string& root, const std::string& split);

// ====== paired augmentation ======

struct AugmentConfig {
  bool enabled = true;
  double scale_min = 0.5;
  double scale_max = 2.0;
  double flip_prob = 0.5;
  i64 out_size = 64;  // crop target (square)
};

/// One sampled geometric transform, applied identically to pre/post/gt.
struct AugDraw {
  double scale = 1.0;
  bool flip = false;
  double u_crop_y = 0.5, u_crop_x = 0.5;  // crop position fractions in [0,1)

  static AugDraw identity() { return {1.0, false, 0.5, 0.5}; }
};

AugDraw sample_aug_draw(Rng& rng, const AugmentConfig& cfg);

/// Resize by draw.scale (bilinear for images, nearest for masks), flip
/// horizontally if drawn, then crop to out_h x out_w at the drawn position,
/// reflecting at borders when the scaled image is smaller than the crop.
/// Values are clamped back to [0,1] for images.
Tensor apply_geometric(const Tensor& img, const AugDraw& draw, i64 out_h, i64 out_w, bool mask);

/// Apply one shared draw to the whole pair and re-derive the image label from
/// the transformed gt. Without gt, a changed pair whose transform erased all
/// visible difference is redrawn up to 8 times, then passed through untouched.
ImagePair augment_pair(const ImagePair& pair, const AugmentConfig& cfg, Rng& rng);

}  // namespace wcd

#endif  // WCD_DATA_HPP_
