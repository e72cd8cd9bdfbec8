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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tokenaudit {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Calls visit(line_number, record) for every non-blank line of a JSONL file.
/// Line numbers are 1-based. Parse failures raise schema_violation naming the line.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(std::size_t, const Json&)>& visit);

/// Parses a whole JSON document.
Json read_json(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames, so readers never observe a
/// half-written artifact.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

void require_file(const std::filesystem::path& path);

/// Append-only line writer. Each line is flushed as it is written.
class JsonlWriter {
public:
    enum class Mode { truncate, append };

    explicit JsonlWriter(const std::filesystem::path& path, Mode mode = Mode::truncate);

    void write(const OrderedJson& record);
    void write(const Json& record);
    void write_line(std::string_view line);

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace tokenaudit
