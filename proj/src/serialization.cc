// Copyright 2026 The DAPrompt Authors.
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

#include "daprompt/serialization.h"

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>

#include "daprompt/errors.h"

namespace daprompt {

namespace {

constexpr char kMagic[4] = {'D', 'A', 'P', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void WritePod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ParseError(0, "truncated parameter file " + path.string());
  }
  return v;
}

void WriteMatrix(std::ostream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void ReadMatrix(std::istream& in, Matrix& m, const std::filesystem::path& path) {
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw ParseError(0, "truncated parameter file " + path.string());
  }
}

}  // namespace

void SaveParameters(const std::filesystem::path& path,
                    const std::vector<Parameter*>& params,
                    bool with_optimizer_state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  WritePod(out, kVersion);
  WritePod(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    WritePod(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    WritePod(out, static_cast<std::uint32_t>(p->value.rows()));
    WritePod(out, static_cast<std::uint32_t>(p->value.cols()));
    WritePod(out, static_cast<std::uint8_t>(with_optimizer_state ? 1 : 0));
    WriteMatrix(out, p->value);
    if (with_optimizer_state) {
      WriteMatrix(out, p->adam_m);
      WriteMatrix(out, p->adam_v);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void LoadParameters(const std::filesystem::path& path,
                    const std::vector<Parameter*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw ParseError(0, path.string() + " is not a parameter file");
  }
  if (ReadPod<std::uint32_t>(in, path) != kVersion) {
    throw ParseError(0, "unsupported parameter file version in " + path.string());
  }
  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;
  std::size_t found = 0;
  const auto count = ReadPod<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = ReadPod<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw ParseError(0, "truncated parameter file " + path.string());
    }
    const auto rows = ReadPod<std::uint32_t>(in, path);
    const auto cols = ReadPod<std::uint32_t>(in, path);
    const bool with_state = ReadPod<std::uint8_t>(in, path) != 0;
    auto it = by_name.find(name);
    Matrix scratch;
    Parameter* target = it == by_name.end() ? nullptr : it->second;
    if (target != nullptr && (target->value.rows() != rows ||
                              target->value.cols() != cols)) {
      throw ParseError(0, "shape mismatch for " + name + " in " + path.string());
    }
    auto read_into = [&](Matrix* dest) {
      if (dest == nullptr) {
        scratch.resize(rows, cols);
        dest = &scratch;
      }
      ReadMatrix(in, *dest, path);
    };
    read_into(target ? &target->value : nullptr);
    if (with_state) {
      read_into(target ? &target->adam_m : nullptr);
      read_into(target ? &target->adam_v : nullptr);
    } else if (target != nullptr) {
      target->adam_m.setZero();
      target->adam_v.setZero();
    }
    if (target != nullptr) ++found;
  }
  if (found != by_name.size()) {
    throw ParseError(0, path.string() + " is missing " +
                            std::to_string(by_name.size() - found) +
                            " parameter(s)");
  }
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buffer[1 << 15];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* kHex = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

}  // namespace daprompt
