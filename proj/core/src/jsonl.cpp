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

#include <tokenaudit/jsonl.hpp>

#include <sstream>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {

void require_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::missing_file, path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::schema_violation, path.string() + ": " + e.what());
    }
}

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(std::size_t, const Json&)>& visit) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json record;
        try {
            record = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::schema_violation,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        visit(line_no, record);
    }
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, Mode mode) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto flags = std::ios::binary | (mode == Mode::append ? std::ios::app : std::ios::trunc);
    out_.open(path, flags);
    if (!out_) throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

void JsonlWriter::write(const OrderedJson& record) { write_line(record.dump()); }

void JsonlWriter::write(const Json& record) { write_line(record.dump()); }

void JsonlWriter::write_line(std::string_view line) {
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.put('\n');
    out_.flush();
    if (!out_) throw Error(ErrorCode::io_error, "write failed on " + path_.string());
}

}  // namespace tokenaudit
