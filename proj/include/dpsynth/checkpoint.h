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

#ifndef DPSYNTH_CHECKPOINT_H_
#define DPSYNTH_CHECKPOINT_H_

#include <memory>
#include <string>
#include <string_view>

#include "dpsynth/autodiff.h"
#include "dpsynth/generator.h"
#include "json.hpp"

// Binary container: 8-byte magic "DPSYNCKP", u32 format version, u64 manifest
// length, the JSON manifest, then the parameter blobs as little-endian
// float64. See docs/checkpoint_format.md.
namespace dpsynth::models {

inline constexpr char kCheckpointMagic[] = "DPSYNCKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// `extra` members are merged into the manifest next to "arrays".
std::string SerializeParams(const ad::ParamStore& params,
                            const nlohmann::json& extra);

struct Container {
  nlohmann::json manifest;
  ad::ParamStore params;
};

Container DeserializeParams(std::string_view bytes);

std::string SerializeGenerator(const Generator& gen,
                               const nlohmann::json& meta);

struct LoadedGenerator {
  std::unique_ptr<Generator> generator;
  nlohmann::json meta;
};

LoadedGenerator DeserializeGenerator(std::string_view bytes);

void SaveGenerator(const std::string& path, const Generator& gen,
                   const nlohmann::json& meta);
LoadedGenerator LoadGenerator(const std::string& path);

}  // namespace dpsynth::models

#endif  // DPSYNTH_CHECKPOINT_H_
