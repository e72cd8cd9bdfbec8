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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <tokenaudit/corpus.hpp>

namespace tokenaudit {

/// Per-class logits for one input, ordered by the LabelSet. Logits are the
/// scoring currency; nothing in the pipeline applies a softmax.
struct ScoreVector {
    std::vector<double> logits;

    std::size_t size() const noexcept { return logits.size(); }
    double operator[](std::size_t i) const { return logits[i]; }

    friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

/// Names a single token occurrence removed from an instance.
struct OmissionSpec {
    std::string segment;
    std::size_t position = 0;

    friend bool operator==(const OmissionSpec&, const OmissionSpec&) = default;
};

/// Identifies what a score input is, so caching layers can address it.
struct ScoreKey {
    std::string instance;
    std::optional<OmissionSpec> omit;  // nullopt = the unperturbed input

    friend bool operator==(const ScoreKey&, const ScoreKey&) = default;
};

/// One input to score: the texts of the segments the backend consumes, in schema order.
struct ScoreInput {
    std::vector<Segment> segments;
    std::optional<ScoreKey> key;
};

/// argmax over logits; ties go to the lowest label index.
std::size_t argmax_label(const ScoreVector& scores);

/// A classifier viewed as a black box mapping texts to logits.
///
/// Implementations must be deterministic and safe to call concurrently.
/// score_batch() validates the batch and every returned vector (length equal
/// to the label set, finite entries) around the implementation's do_score().
class Backend {
public:
    virtual ~Backend() = default;

    virtual const std::string& id() const noexcept = 0;
    virtual const LabelSet& labels() const noexcept = 0;

    /// Segment names this backend reads. Empty means every segment.
    virtual std::span<const std::string> consumed_segments() const noexcept { return {}; }

    /// Upper bound on concurrent score_batch calls worth issuing.
    virtual std::size_t max_in_flight() const noexcept { return 64; }

    std::vector<ScoreVector> score_batch(std::span<const ScoreInput> inputs) const;
    ScoreVector score(const ScoreInput& input) const;
    std::size_t predict(const ScoreInput& input) const;

    /// Number of inputs this backend has evaluated so far.
    std::uint64_t scored_count() const noexcept { return scored_.load(std::memory_order_relaxed); }

protected:
    virtual std::vector<ScoreVector> do_score(std::span<const ScoreInput> inputs) const = 0;

private:
    mutable std::atomic<std::uint64_t> scored_{0};
};

bool consumes(const Backend& backend, std::string_view segment);

/// Multiplies every logit of the wrapped backend by a positive factor.
class ScaledBackend final : public Backend {
public:
    ScaledBackend(std::shared_ptr<const Backend> inner, double factor);

    const std::string& id() const noexcept override { return inner_->id(); }
    const LabelSet& labels() const noexcept override { return inner_->labels(); }
    std::span<const std::string> consumed_segments() const noexcept override { return inner_->consumed_segments(); }
    std::size_t max_in_flight() const noexcept override { return inner_->max_in_flight(); }

protected:
    std::vector<ScoreVector> do_score(std::span<const ScoreInput> inputs) const override;

private:
    std::shared_ptr<const Backend> inner_;
    double factor_;
};

}  // namespace tokenaudit
