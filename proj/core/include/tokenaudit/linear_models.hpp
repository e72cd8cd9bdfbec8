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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <tokenaudit/backend.hpp>
#include <tokenaudit/tokenizer.hpp>

namespace tokenaudit {

/// Additive token model: logit_c = bias_c + sum of per-token weights w_c.
/// Tokens without an entry contribute nothing. Exact and deterministic, which
/// makes it the analytic reference for omission effects.
///
/// Weights are configured before the model is shared; scoring is read-only.
class LinearTokenModel : public Backend {
public:
    const std::string& id() const noexcept override { return id_; }
    const LabelSet& labels() const noexcept override { return labels_; }
    std::span<const std::string> consumed_segments() const noexcept override { return consumed_; }

    void set_bias(std::size_t label, double bias);
    double bias(std::size_t label) const { return biases_.at(label); }

protected:
    LinearTokenModel(std::string id, LabelSet labels, std::vector<std::string> consumed, const Tokenizer& tokenizer);

    void set_weight_for_key(std::string key, std::size_t label, double weight);
    double weight_for_key(const std::string& key, std::size_t label) const;
    void load_bias(const Json& doc);

    virtual std::string key_for(std::string_view segment, std::string_view token) const = 0;

    std::vector<ScoreVector> do_score(std::span<const ScoreInput> inputs) const override;

    const Tokenizer& tokenizer_;

private:
    std::string id_;
    LabelSet labels_;
    std::vector<std::string> consumed_;
    std::vector<double> biases_;
    std::unordered_map<std::string, std::vector<double>> weights_;
};

/// Segment-agnostic weights: the same token counts the same in every segment.
class LexiconModel final : public LinearTokenModel {
public:
    LexiconModel(std::string id, LabelSet labels, std::vector<std::string> consumed = {},
                 const Tokenizer& tokenizer = tokenizer_for("whitespace"));

    void set_weight(std::string_view token, std::size_t label, double weight);
    double weight(std::string_view token, std::size_t label) const;

    /// {"bias": {label: b}, "weights": {label: {token: w}}}
    static std::shared_ptr<LexiconModel> from_json(std::string id, LabelSet labels, const Json& doc,
                                                   std::vector<std::string> consumed = {});

protected:
    std::string key_for(std::string_view segment, std::string_view token) const override;
};

/// Bag-of-words weights keyed by (segment, token).
class LinearBowModel final : public LinearTokenModel {
public:
    LinearBowModel(std::string id, LabelSet labels, std::vector<std::string> consumed = {},
                   const Tokenizer& tokenizer = tokenizer_for("whitespace"));

    void set_weight(std::string_view segment, std::string_view token, std::size_t label, double weight);
    double weight(std::string_view segment, std::string_view token, std::size_t label) const;

    /// {"bias": {label: b}, "weights": {segment: {label: {token: w}}}}
    static std::shared_ptr<LinearBowModel> from_json(std::string id, LabelSet labels, const Json& doc,
                                                     std::vector<std::string> consumed = {});

protected:
    std::string key_for(std::string_view segment, std::string_view token) const override;
};

}  // namespace tokenaudit
