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

#ifndef DAPROMPT_SERIALIZATION_H_
#define DAPROMPT_SERIALIZATION_H_

#include <filesystem>
#include <string>
#include <vector>

#include "daprompt/nn.h"

namespace daprompt {

// Binary parameter file: magic, version, then per parameter its name, shape,
// values and (optionally) AdamW moments. Host byte order.
void SaveParameters(const std::filesystem::path& path,
                    const std::vector<Parameter*>& params,
                    bool with_optimizer_state);

// Matches by name; every parameter in `params` must be present with the same
// shape. Optimizer moments are restored when stored. Throws ParseError.
void LoadParameters(const std::filesystem::path& path,
                    const std::vector<Parameter*>& params);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

// Hex SHA-256 of a file's bytes.
std::string Sha256File(const std::filesystem::path& path);

}  // namespace daprompt

#endif  // DAPROMPT_SERIALIZATION_H_
