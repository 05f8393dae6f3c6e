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

#ifndef WCD_PARAMS_HPP_
#define WCD_PARAMS_HPP_

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wcd/autodiff.hpp"
#include "wcd/rng.hpp"

namespace wcd {

/// Named registry of trainable leaves. Creation order is preserved so
/// optimizers and checkpoints traverse parameters deterministically.
class ParamStore {
 public:
  enum class Init { TruncNormal, Zeros, Ones };

  ad::Var create(const std::string& name, Shape shape, Init init, Rng& rng, double stddev = 0.02);
  ad::Var get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  const std::vector<std::pair<std::string, ad::Var>>& entries() const { return entries_; }
  i64 total_elements() const;
  void zero_grads();

 private:
  std::vector<std::pair<std::string, ad::Var>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace wcd

#endif  // WCD_PARAMS_HPP_
