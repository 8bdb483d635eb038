/* Copyright 2026 The OTSNet Desk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "otsnet/parameters.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "otsnet/errors.hpp"

namespace otsnet {

InitSpec InitSpec::projection(std::size_t fan_in) {
  return {Kind::kTruncatedNormal, 1.0 / std::sqrt(static_cast<double>(fan_in)), true};
}

std::uint64_t hash_name(std::string_view text) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Tensor ParameterStore::add(const std::string& name, const Shape& shape, InitSpec init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  Tensor t = Tensor::zeros(shape);
  t.set_requires_grad(true);
  index_.emplace(name, params_.size());
  params_.push_back({name, t, init});
  return t;
}

void ParameterStore::initialize(std::uint64_t seed) {
  for (auto& p : params_) {
    auto values = p.tensor.mutable_data();
    switch (p.init.kind) {
      case InitSpec::Kind::kZeros:
        std::fill(values.begin(), values.end(), 0.0);
        break;
      case InitSpec::Kind::kOnes:
        std::fill(values.begin(), values.end(), 1.0);
        break;
      case InitSpec::Kind::kTruncatedNormal: {
        std::mt19937_64 rng(mix_seed(seed, hash_name(p.name)));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& v : values) {
          double z = normal(rng);
          while (std::abs(z) > 2.0) z = normal(rng);
          v = z * p.init.stddev;
        }
        break;
      }
    }
    p.tensor.zero_grad();
  }
}

const Tensor& ParameterStore::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw IndexError("unknown parameter: " + std::string(name));
  return params_[it->second].tensor;
}

bool ParameterStore::contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

std::size_t ParameterStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

namespace {

constexpr const char* kManifestHeader = "otsnet-checkpoint 1";

std::string shape_token(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out.empty() ? "scalar" : out;
}

Shape parse_shape_token(const std::string& token) {
  Shape shape;
  if (token == "scalar") return shape;
  std::stringstream ss(token);
  std::string part;
  while (std::getline(ss, part, 'x')) shape.push_back(std::stoul(part));
  return shape;
}

void write_le(std::ofstream& out, double v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const ParameterStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  std::ofstream blob(dir / "params.bin", std::ios::binary | std::ios::trunc);
  if (!manifest || !blob) throw CheckpointError("cannot write checkpoint in " + dir.string());
  manifest << kManifestHeader << '\n';
  std::size_t offset = 0;
  for (const auto& p : store.entries()) {
    manifest << p.name << ' ' << shape_token(p.tensor.shape()) << " f64 " << offset << '\n';
    for (double v : p.tensor.data()) write_le(blob, v);
    offset += p.tensor.numel() * 8;
  }
  if (!manifest || !blob) throw CheckpointError("write failed for checkpoint in " + dir.string());
}

void load_checkpoint(ParameterStore& store, const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt", std::ios::binary);
  if (!manifest) throw CheckpointError("missing manifest in " + dir.string());
  std::ifstream blob_file(dir / "params.bin", std::ios::binary);
  if (!blob_file) throw CheckpointError("missing params.bin in " + dir.string());
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(blob_file)), std::istreambuf_iterator<char>());

  std::string line;
  std::getline(manifest, line);
  if (line != kManifestHeader) throw CheckpointError("unrecognized manifest header: " + line);

  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, shape, dtype;
    std::size_t offset = 0;
    if (!(ls >> name >> shape >> dtype >> offset) || dtype != "f64") {
      throw CheckpointError("malformed manifest line: " + line);
    }
    try {
      entries.push_back({name, parse_shape_token(shape), offset});
    } catch (const std::logic_error&) {
      throw CheckpointError("malformed shape in manifest line: " + line);
    }
  }

  std::size_t expected_bytes = 0;
  for (const auto& p : store.entries()) expected_bytes += p.tensor.numel() * 8;
  for (const auto& p : store.entries()) {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.name == p.name; });
    if (it == entries.end()) throw CheckpointError("checkpoint lacks tensor " + p.name);
    if (it->shape != p.tensor.shape()) {
      throw CheckpointError("tensor " + p.name + " has shape " + shape_str(it->shape) + " in checkpoint but " +
                            shape_str(p.tensor.shape()) + " in model");
    }
  }
  if (entries.size() != store.entries().size()) {
    for (const auto& e : entries) {
      if (!store.contains(e.name)) throw CheckpointError("checkpoint has unexpected tensor " + e.name);
    }
  }
  if (blob.size() != expected_bytes) {
    throw CheckpointError("params.bin holds " + std::to_string(blob.size()) + " bytes, manifest needs " +
                          std::to_string(expected_bytes));
  }
  for (const auto& e : entries) {
    Tensor t = store.get(e.name);
    auto values = t.mutable_data();
    if (e.offset + values.size() * 8 > blob.size()) throw CheckpointError("tensor " + e.name + " overruns params.bin");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = read_le(blob.data() + e.offset + 8 * i);
  }
}

}  // namespace otsnet
