/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <filesystem>
#include <string_view>

#include <tokenaudit/jsonl.hpp>

namespace tokenaudit {

// Reads the flat TOML subset used by descriptor files:
//   key = "string" | 'string' | integer | float | true | false | [ scalars ]
//   [table] headers (one level), # comments.
// Multi-line arrays are accepted; inline tables and dotted keys are not.
Json parse_toml_subset(std::string_view text);

/// Loads a config document; .json files are parsed as JSON, anything else as TOML.
Json load_config(const std::filesystem::path& path);

}  // namespace tokenaudit
