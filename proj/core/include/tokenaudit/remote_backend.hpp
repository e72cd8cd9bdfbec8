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

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include <tokenaudit/backend.hpp>
#include <tokenaudit/jsonl.hpp>

namespace tokenaudit {

struct RemoteOptions {
    std::string endpoint;  // "http://host:port" or "host:port"
    std::size_t max_in_flight = 4;
    std::size_t batch_size = 64;
    std::chrono::milliseconds timeout{30000};
};

struct RemoteMeta {
    std::vector<std::string> labels;
    std::string model_id;
};

// Wire helpers for the /v1 scoring protocol. Exposed so servers and
// conformance checks speak exactly the same format as the client.
Json make_score_request(std::span<const ScoreInput> inputs);
std::vector<ScoreVector> parse_score_response(const Json& body, std::size_t expected_inputs, std::size_t classes);
RemoteMeta parse_meta_response(const Json& body);

RemoteMeta fetch_meta(const RemoteOptions& options);

/// Client for a model served behind POST /v1/score and GET /v1/meta.
///
/// Batches are split into requests of at most batch_size inputs; concurrent
/// requests across all callers are bounded by max_in_flight.
class RemoteBackend final : public Backend {
public:
    RemoteBackend(std::string id, LabelSet labels, RemoteOptions options, std::vector<std::string> consumed = {});

    const std::string& id() const noexcept override { return id_; }
    const LabelSet& labels() const noexcept override { return labels_; }
    std::span<const std::string> consumed_segments() const noexcept override { return consumed_; }
    std::size_t max_in_flight() const noexcept override { return options_.max_in_flight; }

    /// Checks /v1/meta against the configured label order (label_mismatch).
    RemoteMeta verify_meta() const;
    std::uint64_t requests_sent() const noexcept { return requests_.load(); }

protected:
    std::vector<ScoreVector> do_score(std::span<const ScoreInput> inputs) const override;

private:
    std::string id_;
    LabelSet labels_;
    RemoteOptions options_;
    std::vector<std::string> consumed_;
    mutable std::counting_semaphore<1024> slots_;
    mutable std::atomic<std::uint64_t> requests_{0};
};

}  // namespace tokenaudit
