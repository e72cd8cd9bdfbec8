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

#include <tokenaudit/config.hpp>

#include <cctype>
#include <charconv>
#include <string>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {
namespace {

class TomlReader {
public:
    explicit TomlReader(std::string_view text) : text_(text) {}

    Json parse() {
        Json root = Json::object();
        Json* table = &root;
        while (true) {
            skip_blank_lines();
            if (at_end()) break;
            if (peek() == '[') {
                ++pos_;
                skip_inline_space();
                const std::string name = read_key();
                skip_inline_space();
                expect(']');
                if (root.contains(name)) fail("duplicate table [" + name + "]");
                root[name] = Json::object();
                table = &root[name];
            } else {
                const std::string key = read_key();
                skip_inline_space();
                expect('=');
                skip_inline_space();
                if (table->contains(key)) fail("duplicate key '" + key + "'");
                (*table)[key] = read_value();
            }
            finish_line();
        }
        return root;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::schema_violation, "line " + std::to_string(line_) + ": " + what);
    }

    void expect(char c) {
        if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_inline_space() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        if (!at_end() && peek() == '#') {
            while (!at_end() && peek() != '\n') ++pos_;
        }
    }

    // Skips whitespace, newlines and comments; used inside arrays and between entries.
    void skip_blank_lines() {
        while (!at_end()) {
            const char c = peek();
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else if (c == '#') {
                skip_comment();
            } else {
                break;
            }
        }
    }

    void finish_line() {
        skip_inline_space();
        skip_comment();
        if (!at_end() && peek() == '\r') ++pos_;
        if (at_end()) return;
        if (peek() != '\n') fail("trailing characters");
    }

    std::string read_key() {
        if (!at_end() && (peek() == '"' || peek() == '\'')) return read_string();
        const std::size_t start = pos_;
        while (!at_end()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
                ++pos_;
            } else {
                break;
            }
        }
        if (start == pos_) fail("expected key");
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string read_string() {
        const char quote = peek();
        ++pos_;
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            const char c = peek();
            ++pos_;
            if (c == quote) break;
            if (c == '\\' && quote == '"') {
                if (at_end()) fail("unterminated escape");
                const char e = peek();
                ++pos_;
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

    Json read_value() {
        if (at_end()) fail("expected value");
        const char c = peek();
        if (c == '"' || c == '\'') return read_string();
        if (c == '[') {
            ++pos_;
            Json arr = Json::array();
            while (true) {
                skip_blank_lines();
                if (at_end()) fail("unterminated array");
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                arr.push_back(read_value());
                skip_blank_lines();
                if (!at_end() && peek() == ',') ++pos_;
            }
            return arr;
        }
        const std::size_t start = pos_;
        while (!at_end()) {
            const char d = peek();
            if (d == ',' || d == ']' || d == '#' || d == '\n' || d == ' ' || d == '\t' || d == '\r') break;
            ++pos_;
        }
        std::string token(text_.substr(start, pos_ - start));
        if (token == "true") return true;
        if (token == "false") return false;
        std::string digits;
        for (char d : token) {
            if (d != '_') digits.push_back(d);
        }
        const bool is_float = digits.find_first_of(".eE") != std::string::npos ||
                              digits == "inf" || digits == "nan";
        if (!is_float) {
            long long v = 0;
            const char* first = digits.data();
            if (!digits.empty() && digits.front() == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), v);
            if (ec == std::errc() && ptr == digits.data() + digits.size()) return v;
        } else {
            try {
                std::size_t used = 0;
                const double v = std::stod(digits, &used);
                if (used == digits.size()) return v;
            } catch (const std::exception&) {
            }
        }
        fail("unrecognised value '" + token + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace

Json parse_toml_subset(std::string_view text) { return TomlReader(text).parse(); }

Json load_config(const std::filesystem::path& path) {
    if (path.extension() == ".json") return read_json(path);
    try {
        return parse_toml_subset(read_text(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::schema_violation) {
            throw Error(ErrorCode::schema_violation, path.string() + ": " + e.what());
        }
        throw;
    }
}

}  // namespace tokenaudit
