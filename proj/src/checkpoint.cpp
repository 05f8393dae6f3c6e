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

#include "wcd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "wcd/errors.hpp"

namespace wcd {

namespace {

constexpr char kMagic[8] = {'W', 'C', 'D', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob layout assumes a little-endian host");

using json = nlohmann::json;

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(std::string("checkpoint: truncated while reading ") + what);
  }
}

json shape_to_json(const Shape& s) { return json(s); }

Shape shape_from_json(const json& j) {
  Shape s;
  for (const auto& v : j) s.push_back(v.get<i64>());
  return s;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
  write_bytes(out, t.data(), static_cast<std::size_t>(t.numel()) * sizeof(double));
}

Tensor read_tensor(std::ifstream& in, const Shape& shape, const char* what) {
  Tensor t = Tensor::zeros(shape);
  read_bytes(in, t.data(), static_cast<std::size_t>(t.numel()) * sizeof(double), what);
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
  json meta;
  meta["iteration"] = data.iteration;
  meta["seed"] = data.seed;
  meta["config_ini"] = data.config_ini;

  json params = json::array();
  for (const auto& [name, tensor] : data.params) {
    params.push_back({{"name", name}, {"shape", shape_to_json(tensor.shape())}});
  }
  meta["params"] = std::move(params);

  if (data.has_optimizer) {
    json opt;
    opt["weight_decay"] = data.weight_decay;
    opt["beta1"] = data.beta1;
    opt["beta2"] = data.beta2;
    opt["eps"] = data.eps;
    json slots = json::array();
    for (const auto& s : data.slots) {
      slots.push_back({{"name", s.name},
                       {"group", s.group},
                       {"decay", s.decay},
                       {"gate_start", s.gate_start},
                       {"t", s.t},
                       {"shape", shape_to_json(s.m.shape())}});
    }
    opt["slots"] = std::move(slots);
    meta["optimizer"] = std::move(opt);
  }

  const std::string meta_str = meta.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot open for writing: " + path);
  write_bytes(out, kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  write_bytes(out, &version, sizeof(version));
  const std::uint64_t meta_len = meta_str.size();
  write_bytes(out, &meta_len, sizeof(meta_len));
  write_bytes(out, meta_str.data(), meta_str.size());

  for (const auto& [name, tensor] : data.params) write_tensor(out, tensor);
  if (data.has_optimizer) {
    for (const auto& s : data.slots) {
      write_tensor(out, s.m);
      write_tensor(out, s.v);
    }
  }
  out.flush();
  if (!out) throw Error("checkpoint: write failed: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open: " + path);

  char magic[8];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("checkpoint: bad magic in " + path);
  }
  std::uint32_t version = 0;
  read_bytes(in, &version, sizeof(version), "version");
  if (version != kVersion) {
    throw Error("checkpoint: unsupported format version " + std::to_string(version));
  }
  std::uint64_t meta_len = 0;
  read_bytes(in, &meta_len, sizeof(meta_len), "metadata length");
  std::string meta_str(meta_len, '\0');
  read_bytes(in, meta_str.data(), meta_len, "metadata");

  json meta;
  try {
    meta = json::parse(meta_str);
  } catch (const std::exception& e) {
    throw Error(std::string("checkpoint: metadata parse failure: ") + e.what());
  }

  CheckpointData data;
  try {
    data.iteration = meta.at("iteration").get<i64>();
    data.seed = meta.at("seed").get<std::uint64_t>();
    data.config_ini = meta.at("config_ini").get<std::string>();
    for (const auto& p : meta.at("params")) {
      const auto name = p.at("name").get<std::string>();
      const Shape shape = shape_from_json(p.at("shape"));
      data.params.emplace_back(name, read_tensor(in, shape, name.c_str()));
    }
    if (meta.contains("optimizer")) {
      const auto& opt = meta.at("optimizer");
      data.has_optimizer = true;
      data.weight_decay = opt.at("weight_decay").get<double>();
      data.beta1 = opt.at("beta1").get<double>();
      data.beta2 = opt.at("beta2").get<double>();
      data.eps = opt.at("eps").get<double>();
      for (const auto& sj : opt.at("slots")) {
        CheckpointData::SlotState s;
        s.name = sj.at("name").get<std::string>();
        s.group = sj.at("group").get<std::string>();
        s.decay = sj.at("decay").get<bool>();
        s.gate_start = sj.at("gate_start").get<i64>();
        s.t = sj.at("t").get<i64>();
        const Shape shape = shape_from_json(sj.at("shape"));
        s.m = read_tensor(in, shape, "optimizer m");
        s.v = read_tensor(in, shape, "optimizer v");
        data.slots.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: malformed metadata: ") + e.what());
  }

  // A stray trailing byte means directory and blob disagree.
  char probe;
  in.read(&probe, 1);
  if (in.gcount() != 0) throw Error("checkpoint: trailing bytes after blob in " + path);
  return data;
}

}  // namespace wcd
