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

#ifndef WCD_PNG_IO_HPP_
#define WCD_PNG_IO_HPP_

#include <string>

#include "wcd/tensor.hpp"

namespace wcd {

/// Read a PNG as (3,H,W) doubles in [0,1]. Grayscale, palette and alpha
/// inputs are expanded/stripped to 8-bit RGB.
Tensor read_image_rgb(const std::string& path);

/// Read a PNG as (H,W) doubles holding the raw 8-bit values 0..255 (color
/// inputs are converted to luminance).
Tensor read_image_gray(const std::string& path);

/// Write (3,H,W) values in [0,1] as an 8-bit RGB PNG (round(255*v), clamped).
void write_image_rgb(const std::string& path, const Tensor& img);

/// Write (H,W) values 0..255 as an 8-bit grayscale PNG (rounded, clamped).
void write_image_gray(const std::string& path, const Tensor& img);

}  // namespace wcd

#endif  // WCD_PNG_IO_HPP_
