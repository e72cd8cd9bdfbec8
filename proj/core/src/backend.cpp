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

#include <tokenaudit/backend.hpp>

#include <algorithm>
#include <cmath>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {

std::size_t argmax_label(const ScoreVector& scores) {
    if (scores.logits.empty()) throw Error(ErrorCode::dimension_mismatch, "empty score vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.logits.size(); ++i) {
        if (scores.logits[i] > scores.logits[best]) best = i;
    }
    return best;
}

std::vector<ScoreVector> Backend::score_batch(std::span<const ScoreInput> inputs) const {
    if (inputs.empty()) throw Error(ErrorCode::invalid_argument, "empty batch for backend '" + id() + "'");
    auto out = do_score(inputs);
    scored_.fetch_add(inputs.size(), std::memory_order_relaxed);
    if (out.size() != inputs.size()) {
        throw Error(ErrorCode::dimension_mismatch, "backend '" + id() + "' returned " + std::to_string(out.size()) +
                                                       " score vectors for " + std::to_string(inputs.size()) +
                                                       " inputs");
    }
    const std::size_t classes = labels().size();
    for (const auto& v : out) {
        if (v.size() != classes) {
            throw Error(ErrorCode::dimension_mismatch, "backend '" + id() + "' returned " +
                                                           std::to_string(v.size()) + " logits for " +
                                                           std::to_string(classes) + " classes");
        }
        if (!std::all_of(v.logits.begin(), v.logits.end(), [](double x) { return std::isfinite(x); })) {
            throw Error(ErrorCode::dimension_mismatch, "backend '" + id() + "' returned a non-finite logit");
        }
    }
    return out;
}

ScoreVector Backend::score(const ScoreInput& input) const {
    return std::move(score_batch(std::span<const ScoreInput>(&input, 1)).front());
}

std::size_t Backend::predict(const ScoreInput& input) const { return argmax_label(score(input)); }

bool consumes(const Backend& backend, std::string_view segment) {
    const auto consumed = backend.consumed_segments();
    if (consumed.empty()) return true;
    return std::find(consumed.begin(), consumed.end(), segment) != consumed.end();
}

ScaledBackend::ScaledBackend(std::shared_ptr<const Backend> inner, double factor)
    : inner_(std::move(inner)), factor_(factor) {
    if (!inner_) throw Error(ErrorCode::invalid_argument, "scaled backend needs an inner backend");
    if (!(factor_ > 0.0) || !std::isfinite(factor_)) {
        throw Error(ErrorCode::invalid_argument, "scale factor must be positive and finite");
    }
}

std::vector<ScoreVector> ScaledBackend::do_score(std::span<const ScoreInput> inputs) const {
    auto out = inner_->score_batch(inputs);
    for (auto& v : out) {
        for (auto& x : v.logits) x *= factor_;
    }
    return out;
}

}  // namespace tokenaudit
