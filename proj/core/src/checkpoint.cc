/*
 * Copyright 2026 The cfaug Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cfaug/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cfaug::nn {
namespace {

constexpr const char* kMagic = "cfaug-checkpoint";
constexpr int kVersion = 1;

void PutLe(std::ostream& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  char bytes[4];
  for (int i = 0; i < 4; ++i)
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

float GetLe(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw IoError("checkpoint truncated");
  }
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i)
    bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

std::string ReadLine(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("checkpoint manifest truncated");
  return line;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path,
                    const Network<float>& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const NetworkSpec& s = net.spec();
  out << kMagic << ' ' << kVersion << '\n';
  out << "spec " << s.in_channels << ' ' << s.height << ' ' << s.width << ' '
      << s.num_classes << ' ' << s.conv1 << ' ' << s.conv2 << ' '
      << (s.global_pool ? "global" : "avg2") << '\n';
  out << "tensors " << net.params().size() << '\n';
  const auto& names = Network<float>::ParamNames();
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    const auto& shape = net.params()[i].shape();
    out << names[i] << ' ' << shape.size();
    for (int d : shape) out << ' ' << d;
    out << '\n';
  }
  out << "data\n";
  for (const auto& p : net.params()) {
    for (float v : p.values()) PutLe(out, v);
  }
  if (!out) throw IoError("error writing checkpoint " + path.string());
}

Network<float> LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());

  std::istringstream header(ReadLine(in));
  std::string magic;
  int version = 0;
  header >> magic >> version;
  if (magic != kMagic || version != kVersion) {
    throw IoError(path.string() + " is not a version-1 cfaug checkpoint");
  }

  NetworkSpec spec;
  std::istringstream spec_line(ReadLine(in));
  std::string tag, pool;
  spec_line >> tag >> spec.in_channels >> spec.height >> spec.width >>
      spec.num_classes >> spec.conv1 >> spec.conv2 >> pool;
  if (tag != "spec" || !spec_line || (pool != "avg2" && pool != "global")) {
    throw IoError("malformed spec line");
  }
  spec.global_pool = pool == "global";

  std::istringstream count_line(ReadLine(in));
  std::size_t count = 0;
  count_line >> tag >> count;
  if (tag != "tensors" || !count_line) throw IoError("malformed tensors line");

  std::vector<std::vector<int>> shapes;
  const auto& names = Network<float>::ParamNames();
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream line(ReadLine(in));
    std::string name;
    std::size_t rank = 0;
    line >> name >> rank;
    std::vector<int> shape(rank);
    for (auto& d : shape) line >> d;
    if (!line || i >= names.size() || name != names[i]) {
      throw IoError("malformed tensor entry '" + name + "'");
    }
    shapes.push_back(std::move(shape));
  }
  if (ReadLine(in) != "data") throw IoError("missing data marker");

  std::vector<Tensor<float>> params;
  for (auto& shape : shapes) {
    Tensor<float> t(shape);
    for (auto& v : t.values()) v = GetLe(in);
    params.push_back(std::move(t));
  }
  return Network<float>(spec, std::move(params));
}

}  // namespace cfaug::nn
