// Copyright 2026 The SAda Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sada/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sada/error.hpp"

namespace sada {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'S', 'A', 'D', 'A'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  }
  template <class V>
  void put(V v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(V));
  }
  void put_floats(const std::vector<float>& v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(float)));
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint '" + path_.string() + "' is truncated");
  }
  template <class V>
  V get() {
    need(sizeof(V));
    V v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }
  void get_floats(std::vector<float>& v) {
    need(v.size() * sizeof(float));
    std::memcpy(v.data(), bytes_.data() + pos_, v.size() * sizeof(float));
    pos_ += v.size() * sizeof(float);
  }
  const char* peek(std::size_t n) {
    need(n);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::filesystem::path path_;
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Writer w(path);
  w.raw(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.layers.size()));
  for (const auto& layer : ckpt.layers) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.in_channels));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.out_channels));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.kernel));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.padding));
  }
  for (const auto& layer : ckpt.layers) {
    w.put_floats(layer.weight);
    w.put_floats(layer.bias);
  }
  w.put<std::uint8_t>(ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    const AdamState<float>& a = *ckpt.adam;
    if (a.m.size() != a.v.size()) throw ShapeError("Adam moment vectors differ in length");
    w.put<std::uint64_t>(a.step);
    w.put<double>(a.lr);
    w.put<double>(a.beta1);
    w.put<double>(a.beta2);
    w.put<double>(a.epsilon);
    w.put<std::uint64_t>(a.m.size());
    w.put_floats(a.m);
    w.put_floats(a.v);
  }
  w.finish();
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  if (std::memcmp(r.peek(kMagic.size()), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("'" + path.string() + "' is not a SADA checkpoint");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  if (count > 4096) throw FormatError("implausible layer count in checkpoint");
  Checkpoint ckpt;
  ckpt.layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto in = r.get<std::uint32_t>();
    const auto out = r.get<std::uint32_t>();
    const auto k = r.get<std::uint32_t>();
    const auto tag = r.get<std::uint32_t>();
    if (in == 0 || out == 0 || k == 0 || k % 2 == 0 || in > 65536 || out > 65536 || k > 31 ||
        tag > 1) {
      throw FormatError("bad layer header in checkpoint");
    }
    ckpt.layers.emplace_back(static_cast<int>(in), static_cast<int>(out), static_cast<int>(k),
                             static_cast<Padding>(tag));
  }
  for (auto& layer : ckpt.layers) {
    r.get_floats(layer.weight);
    r.get_floats(layer.bias);
  }
  const auto has_adam = r.get<std::uint8_t>();
  if (has_adam > 1) throw FormatError("bad Adam presence flag in checkpoint");
  if (has_adam == 1) {
    AdamState<float> a;
    a.step = r.get<std::uint64_t>();
    a.lr = r.get<double>();
    a.beta1 = r.get<double>();
    a.beta2 = r.get<double>();
    a.epsilon = r.get<double>();
    const auto n = r.get<std::uint64_t>();
    r.need(n * 2 * sizeof(float));
    a.m.resize(n);
    a.v.resize(n);
    r.get_floats(a.m);
    r.get_floats(a.v);
    ckpt.adam = std::move(a);
  }
  if (!r.at_end()) throw FormatError("trailing bytes in checkpoint '" + path.string() + "'");
  return ckpt;
}

}  // namespace sada
