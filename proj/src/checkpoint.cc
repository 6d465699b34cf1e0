// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsynth/checkpoint.h"

#include <bit>
#include <cstring>

#include "dpsynth/csv.h"
#include "dpsynth/error.h"

namespace dpsynth::models {
namespace {

constexpr std::size_t kMagicLen = 8;
constexpr std::size_t kHeaderLen = kMagicLen + 4 + 8;

template <typename T>
void PutLe(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

template <typename T>
T GetLe(std::string_view in, std::size_t pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::string SerializeParams(const ad::ParamStore& params,
                            const nlohmann::json& extra) {
  nlohmann::json manifest = extra;
  manifest["format"] = "dpsynth-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["dtype"] = "f64le";
  nlohmann::json arrays = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const ad::Parameter& p : params) {
    arrays.push_back({{"name", p.name},
                      {"rows", p.value.rows()},
                      {"cols", p.value.cols()},
                      {"trainable", p.trainable},
                      {"offset", offset}});
    offset += 8 * p.value.size();
  }
  manifest["arrays"] = arrays;
  manifest["blob_bytes"] = offset;
  const std::string text = manifest.dump();

  std::string out(kCheckpointMagic, kMagicLen);
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutLe<std::uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const ad::Parameter& p : params) {
    for (double v : p.value.values()) {
      PutLe<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

Container DeserializeParams(std::string_view bytes) {
  if (bytes.size() < kHeaderLen ||
      bytes.substr(0, kMagicLen) != std::string_view(kCheckpointMagic, 8)) {
    throw DataError("checkpoint: bad magic");
  }
  const auto version = GetLe<std::uint32_t>(bytes, kMagicLen);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " +
                    std::to_string(version));
  }
  const auto mlen = GetLe<std::uint64_t>(bytes, kMagicLen + 4);
  if (mlen > bytes.size() - kHeaderLen) {
    throw DataError("checkpoint: truncated manifest");
  }
  Container c;
  try {
    c.manifest = nlohmann::json::parse(bytes.substr(kHeaderLen, mlen));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: manifest: ") + e.what());
  }
  if (c.manifest.value("format", "") != "dpsynth-checkpoint" ||
      c.manifest.value("dtype", "") != "f64le") {
    throw DataError("checkpoint: unrecognized manifest");
  }
  const std::string_view blob = bytes.substr(kHeaderLen + mlen);
  try {
    for (const auto& a : c.manifest.at("arrays")) {
      const auto rows = a.at("rows").get<std::size_t>();
      const auto cols = a.at("cols").get<std::size_t>();
      const auto off = a.at("offset").get<std::uint64_t>();
      if (off > blob.size() || 8 * rows * cols > blob.size() - off) {
        throw DataError("checkpoint: array '" +
                        a.at("name").get<std::string>() + "' out of range");
      }
      Matrix m(rows, cols);
      for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = std::bit_cast<double>(GetLe<std::uint64_t>(blob, off + 8 * i));
      }
      c.params.Add(a.at("name").get<std::string>(), std::move(m),
                   a.value("trainable", true));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: manifest: ") + e.what());
  }
  return c;
}

std::string SerializeGenerator(const Generator& gen,
                               const nlohmann::json& meta) {
  nlohmann::json extra = {{"kind", "generator"},
                          {"schema", gen.schema().ToJson()},
                          {"generator", gen.config().ToJson()},
                          {"meta", meta}};
  return SerializeParams(gen.params(), extra);
}

LoadedGenerator DeserializeGenerator(std::string_view bytes) {
  Container c = DeserializeParams(bytes);
  if (c.manifest.value("kind", "") != "generator") {
    throw DataError("checkpoint: not a generator checkpoint");
  }
  auto schema = std::make_shared<const tabular::TableSchema>(
      tabular::TableSchema::FromJson(c.manifest.at("schema")));
  Rng unused = MakeRng(0);
  LoadedGenerator out;
  out.generator = std::make_unique<Generator>(
      schema, GeneratorConfig::FromJson(c.manifest.at("generator")), unused);
  ad::ParamStore& dst = out.generator->params();
  if (dst.size() != c.params.size()) {
    throw DataError("checkpoint: parameter count mismatch");
  }
  for (const ad::Parameter& p : c.params) {
    auto id = dst.Find(p.name);
    if (!id || !dst[*id].value.SameShape(p.value)) {
      throw DataError("checkpoint: unexpected parameter '" + p.name + "'");
    }
    dst[*id].value = p.value;
  }
  out.meta = c.manifest.value("meta", nlohmann::json::object());
  return out;
}

void SaveGenerator(const std::string& path, const Generator& gen,
                   const nlohmann::json& meta) {
  tabular::WriteFileAtomic(path, SerializeGenerator(gen, meta));
}

LoadedGenerator LoadGenerator(const std::string& path) {
  return DeserializeGenerator(tabular::ReadFile(path));
}

}  // namespace dpsynth::models
