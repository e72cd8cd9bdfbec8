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

#include <tokenaudit/tokenizer.hpp>

#include <array>
#include <cctype>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string join_with_space(std::span<const std::string> tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::string_view id() const noexcept override { return "whitespace"; }

    TokenList split(std::string_view text) const override {
        TokenList out;
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && is_space(text[i])) ++i;
            const std::size_t start = i;
            while (i < text.size() && !is_space(text[i])) ++i;
            if (i > start) out.emplace_back(text.substr(start, i - start));
        }
        return out;
    }

    std::string join(std::span<const std::string> tokens) const override { return join_with_space(tokens); }
};

// Whitespace split, then ASCII punctuation becomes its own token.
class PunctTokenizer final : public Tokenizer {
public:
    std::string_view id() const noexcept override { return "punct"; }

    TokenList split(std::string_view text) const override {
        TokenList out;
        std::string current;
        auto flush = [&] {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        };
        for (char c : text) {
            if (is_space(c)) {
                flush();
            } else if (std::ispunct(static_cast<unsigned char>(c))) {
                flush();
                out.emplace_back(1, c);
            } else {
                current.push_back(c);
            }
        }
        flush();
        return out;
    }

    std::string join(std::span<const std::string> tokens) const override { return join_with_space(tokens); }
};

const WhitespaceTokenizer kWhitespace;
const PunctTokenizer kPunct;
const std::array<const Tokenizer*, 2> kRegistry{&kWhitespace, &kPunct};

}  // namespace

const Tokenizer& tokenizer_for(std::string_view id) {
    for (const Tokenizer* t : kRegistry) {
        if (t->id() == id) return *t;
    }
    throw Error(ErrorCode::unknown_tokenizer, std::string(id));
}

std::vector<std::string> registered_tokenizers() {
    std::vector<std::string> out;
    for (const Tokenizer* t : kRegistry) out.emplace_back(t->id());
    return out;
}

std::size_t TokenizedInstance::token_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.size();
    return n;
}

TokenizedInstance tokenize(const Instance& instance, const Tokenizer& tokenizer) {
    TokenizedInstance out;
    out.segments.reserve(instance.segments.size());
    for (const auto& seg : instance.segments) out.segments.push_back(tokenizer.split(seg.text));
    return out;
}

TokenizedInstance tokenize(const Instance& instance, std::string_view tokenizer_id) {
    return tokenize(instance, tokenizer_for(tokenizer_id));
}

std::string join_without(const Tokenizer& tokenizer, const TokenList& tokens, std::size_t position) {
    if (position >= tokens.size()) {
        throw Error(ErrorCode::position_out_of_range,
                    "position " + std::to_string(position) + " of " + std::to_string(tokens.size()));
    }
    TokenList kept;
    kept.reserve(tokens.size() - 1);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != position) kept.push_back(tokens[i]);
    }
    return tokenizer.join(kept);
}

}  // namespace tokenaudit
