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

#include "wcd/objective.hpp"

#include <cmath>

#include "wcd/errors.hpp"

namespace wcd {

Mode parse_mode(const std::string& s) {
  if (s == "transwcd") return Mode::Transwcd;
  if (s == "transwcd_l") return Mode::TranswcdL;
  if (s == "transwcd_d") return Mode::TranswcdD;
  if (s == "transwcd_dl") return Mode::TranswcdDl;
  throw ConfigError("unknown mode: '" + s +
                    "' (expected transwcd|transwcd_l|transwcd_d|transwcd_dl)");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Transwcd: return "transwcd";
    case Mode::TranswcdL: return "transwcd_l";
    case Mode::TranswcdD: return "transwcd_d";
    case Mode::TranswcdDl: return "transwcd_dl";
  }
  throw ConfigError("bad mode");
}

ActiveParts active_parts(Mode m) {
  switch (m) {
    case Mode::Transwcd: return {true, false, false};
    case Mode::TranswcdL: return {true, false, true};
    case Mode::TranswcdD: return {true, true, false};
    case Mode::TranswcdDl: return {true, true, true};
  }
  throw ConfigError("bad mode");
}

double total_loss(const LossParts& parts, Mode mode) {
  if (parts.epsilon_cp < 0.0) throw RangeError("total_loss: epsilon_cp must be >= 0");
  if (parts.iteration < 0 || parts.dp_start < 0)
    throw RangeError("total_loss: iteration and dp_start must be >= 0");
  if (!std::isfinite(parts.l_cc) || parts.l_cc < 0.0)
    throw RangeError("total_loss: l_cc must be finite and >= 0");

  const ActiveParts need = active_parts(mode);
  double total = parts.l_cc;
  if (need.cp) {
    const bool gate_open = parts.iteration >= parts.dp_start;
    if (gate_open) {
      if (!parts.l_cp) throw ConfigError("total_loss: mode needs l_cp after dp_start");
      if (!std::isfinite(*parts.l_cp) || *parts.l_cp < 0.0)
        throw RangeError("total_loss: l_cp must be finite and >= 0");
      total += parts.epsilon_cp * *parts.l_cp;
    }
  }
  if (need.lg) {
    if (!parts.l_lg) throw ConfigError("total_loss: mode needs l_lg");
    if (!std::isfinite(*parts.l_lg) || *parts.l_lg < 0.0)
      throw RangeError("total_loss: l_lg must be finite and >= 0");
    total += *parts.l_lg;
  }
  return total;
}

}  // namespace wcd
