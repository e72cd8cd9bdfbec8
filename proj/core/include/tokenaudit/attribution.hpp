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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <tokenaudit/backend.hpp>
#include <tokenaudit/corpus.hpp>
#include <tokenaudit/errors.hpp>
#include <tokenaudit/score_cache.hpp>
#include <tokenaudit/tokenizer.hpp>

namespace tokenaudit {

/// Which tokens enter attribution vectors: every token, or one segment's
/// tokens only (the partial-input setting, applied to both models).
struct AttributionScope {
    enum class Mode { full, partial };

    Mode mode = Mode::full;
    std::string partial_segment;

    static AttributionScope full() { return {}; }
    static AttributionScope partial(std::string segment) { return {Mode::partial, std::move(segment)}; }

    /// "full" or "partial:<segment>".
    static AttributionScope parse(std::string_view text);
    std::string to_string() const;

    bool includes(std::string_view segment) const { return mode == Mode::full || segment == partial_segment; }

    friend bool operator==(const AttributionScope&, const AttributionScope&) = default;
};

struct TokenRef {
    std::string segment;
    std::size_t position = 0;  // within the segment
    std::string text;

    friend bool operator==(const TokenRef&, const TokenRef&) = default;
};

/// Omission effects of one model on one instance, in corpus token order.
struct AttributionVector {
    std::string instance;
    std::string backend;
    AttributionScope scope;
    std::vector<TokenRef> tokens;
    std::vector<double> effects;
    ScoreVector full_logits;
    std::size_t predicted = 0;
    std::size_t gold = 0;
    bool correct = false;

    bool empty_scope() const noexcept { return tokens.empty(); }

    friend bool operator==(const AttributionVector&, const AttributionVector&) = default;
};

OrderedJson attribution_to_json(const AttributionVector& v);
AttributionVector attribution_from_json(const Json& record, const std::string& where);
std::vector<AttributionVector> read_attribution_file(const std::filesystem::path& path);
void write_attribution_file(const std::filesystem::path& path, const std::vector<AttributionVector>& vectors);

/// Throws label_mismatch / schema_violation when the backend cannot score this corpus.
void check_backend_compatible(const Backend& backend, const Manifest& manifest);

/// Change in the gold-class logit when the token at (segment, position) is
/// removed: f(x)_gold - f(x without that occurrence)_gold.
double omission_effect(const Backend& backend, const Instance& instance, const Manifest& manifest,
                       std::string_view segment, std::size_t position);

/// Scores the unperturbed input plus one single-token omission per in-scope
/// token, in one batch. Tokens of segments the backend does not read have
/// effect exactly 0 and are not scored.
AttributionVector attribute_instance(const Backend& backend, const Instance& instance, const Manifest& manifest,
                                     const AttributionScope& scope);

struct AttributionOptions {
    std::size_t workers = 1;
    bool fail_fast = false;
    std::size_t chunk_size = 64;
};

struct AttributionFailure {
    std::string instance;
    ErrorCode code = ErrorCode::invalid_argument;
    std::string message;
};

struct AttributionReport {
    std::size_t written = 0;
    std::vector<AttributionFailure> failures;
};

using AttributionSink = std::function<void(const AttributionVector&)>;

/// Attributes every instance and hands vectors to `sink` in corpus order,
/// whatever the completion order of the workers. Per-instance failures are
/// collected in the report unless options.fail_fast is set.
AttributionReport attribute_corpus(const Backend& backend, const Corpus& corpus, const AttributionScope& scope,
                                   const AttributionOptions& options, const AttributionSink& sink);

/// Same, writing the attribution JSONL file. With a cache, scoring goes
/// through a lazy CachedBackend so interrupted runs resume without rescoring.
AttributionReport attribute_corpus(const Backend& backend, const Corpus& corpus, const AttributionScope& scope,
                                   const std::filesystem::path& out, const AttributionOptions& options = {},
                                   std::shared_ptr<ScoreCache> cache = nullptr);

}  // namespace tokenaudit
