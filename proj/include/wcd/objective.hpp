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

#ifndef WCD_OBJECTIVE_HPP_
#define WCD_OBJECTIVE_HPP_

#include <optional>
#include <string>

#include "wcd/tensor.hpp"

namespace wcd {

/// Training variants: the plain classifier, classifier + label-gated penalty,
/// classifier + pixel decoder, and the full combination.
enum class Mode { Transwcd, TranswcdL, TranswcdD, TranswcdDl };

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

/// Which loss parts a mode composes.
struct ActiveParts {
  bool cc = true;
  bool cp = false;
  bool lg = false;
};
ActiveParts active_parts(Mode m);

inline bool mode_has_decoder(Mode m) { return active_parts(m).cp; }
inline bool mode_has_lg(Mode m) { return active_parts(m).lg; }

struct LossParts {
  double l_cc = 0.0;
  std::optional<double> l_cp;
  std::optional<double> l_lg;
  double epsilon_cp = 0.1;
  i64 iteration = 0;
  i64 dp_start = 2000;
};

/// Total loss. The pixel-supervision part is weighted by epsilon_cp and
/// gated to zero before dp_start; the gated-off part may then be absent.
/// Throws ConfigError when a part the mode needs is missing.
double total_loss(const LossParts& parts, Mode mode);

}  // namespace wcd

#endif  // WCD_OBJECTIVE_HPP_
