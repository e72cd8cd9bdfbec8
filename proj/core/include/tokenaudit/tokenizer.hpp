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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <tokenaudit/corpus.hpp>

namespace tokenaudit {

using TokenList = std::vector<std::string>;

/// Engine-level tokenizer. Omission operates on these units, never on a
/// backend's internal subwords, and perturbed inputs are rebuilt with join().
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    virtual std::string_view id() const noexcept = 0;
    virtual TokenList split(std::string_view text) const = 0;
    virtual std::string join(std::span<const std::string> tokens) const = 0;
};

/// Looks up a registered tokenizer ("whitespace", "punct"). Throws unknown_tokenizer.
const Tokenizer& tokenizer_for(std::string_view id);
std::vector<std::string> registered_tokenizers();

/// Token lists per segment, in segment-schema order.
struct TokenizedInstance {
    std::vector<TokenList> segments;

    std::size_t token_count() const noexcept;
};

TokenizedInstance tokenize(const Instance& instance, const Tokenizer& tokenizer);
TokenizedInstance tokenize(const Instance& instance, std::string_view tokenizer_id);

/// Re-joins `tokens` with the occurrence at `position` left out.
std::string join_without(const Tokenizer& tokenizer, const TokenList& tokens, std::size_t position);

}  // namespace tokenaudit
