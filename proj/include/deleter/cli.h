// Copyright 2026 The Authors.
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

// Command-line front end: compress, score, eval, health.
//
// Exit codes: 0 success, 1 partial or runtime failure, 2 usage error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "deleter/core.h"
#include "json.hpp"

namespace deleter {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// One JSONL record for a finished path. config is echoed verbatim.
nlohmann::json PathToJson(const DeletionPath& path, const IndexSet& frozen,
                          const nlohmann::json& config);

// Sentence / Deleted Tokens / AvgPPL table of every node on the path.
std::string PathToTable(const DeletionPath& path);

nlohmann::json SearchConfigToJson(const SearchConfig& config);

}  // namespace deleter
