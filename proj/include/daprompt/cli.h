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

#ifndef DAPROMPT_CLI_H_
#define DAPROMPT_CLI_H_

// The `daprompt` command line: validate, generate, pretrain, train, eval,
// sweep, crossval and ablate.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "daprompt/training.h"

namespace daprompt {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidData = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitFailure = 4;

// Writes <dir>/manifest.json. `extra` fields are merged in.
void WriteManifest(const std::filesystem::path& dir, const std::string& command,
                   const nlohmann::json& config,
                   const std::filesystem::path& corpus_path, std::uint64_t seed,
                   const nlohmann::json& extra = nlohmann::json::object());

nlohmann::json ReadManifest(const std::filesystem::path& dir);

// Parses the arguments and runs one command; returns the exit code.
int RunCli(int argc, const char* const* argv);

}  // namespace daprompt

#endif  // DAPROMPT_CLI_H_
