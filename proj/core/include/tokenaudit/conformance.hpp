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

#include <optional>
#include <string>
#include <vector>

#include <tokenaudit/remote_backend.hpp>

namespace tokenaudit {

/// Inputs for probing a /v1 scoring server.
struct ConformanceProbe {
    std::vector<std::vector<std::string>> inputs;  // segment texts per probe input
    std::vector<std::string> expected_labels;      // empty: accept whatever /v1/meta reports
    std::vector<std::size_t> ignored_segments;     // positions the model must not read
};

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs the protocol conformance suite: meta schema, score schema, dimension,
/// determinism (repeat and batch-composition), malformed-request rejection and
/// invariance to perturbations of ignored segments.
std::vector<ConformanceCheck> run_conformance(const RemoteOptions& options, const ConformanceProbe& probe);

}  // namespace tokenaudit
