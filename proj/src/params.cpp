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

#include "wcd/params.hpp"

#include "wcd/errors.hpp"

namespace wcd {

ad::Var ParamStore::create(const std::string& name, Shape shape, Init init, Rng& rng,
                           double stddev) {
  if (index_.count(name)) throw ConfigError("parameter already exists: " + name);
  Tensor t(std::move(shape));
  switch (init) {
    case Init::TruncNormal:
      for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.truncated_normal(0.0, stddev);
      break;
    case Init::Zeros:
      break;
    case Init::Ones:
      for (i64 i = 0; i < t.numel(); ++i) t[i] = 1.0;
      break;
  }
  ad::Var v = ad::leaf(std::move(t), true);
  index_[name] = entries_.size();
  entries_.emplace_back(name, v);
  return v;
}

ad::Var ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return entries_[it->second].second;
}

i64 ParamStore::total_elements() const {
  i64 n = 0;
  for (const auto& [name, v] : entries_) n += v->value.numel();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& [name, v] : entries_) v->clear_grad();
}

}  // namespace wcd
