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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <tokenaudit/backend.hpp>
#include <tokenaudit/remote_backend.hpp>
#include <tokenaudit/score_cache.hpp>

namespace tokenaudit {

enum class BackendKind { lexicon, linear_bow, cache, remote };

std::string_view to_string(BackendKind kind) noexcept;
BackendKind backend_kind_from_string(std::string_view name);

/// Declarative backend configuration, usually read from a TOML or JSON file:
///
///   id = "main"
///   kind = "lexicon"            # lexicon | linear-bow | cache | remote
///   labels = ["entailment", "neutral", "contradiction"]
///   segments = ["hypothesis"]   # optional: segments the model reads
///   weights = "main.weights.json"         # lexicon, linear-bow
///   cache = "main.cache.jsonl"            # cache; optional on other kinds
///   mode = "lazy"                         # cache: strict | lazy
///   inner = "main.remote.toml"            # cache: wrapped descriptor
///   endpoint = "http://127.0.0.1:8500"    # remote
///   max_in_flight = 4
///   batch_size = 64
///   timeout_ms = 30000
///   check_meta = true
///
/// Relative paths resolve against the descriptor file's directory.
struct BackendDescriptor {
    std::string id;
    BackendKind kind = BackendKind::lexicon;
    LabelSet labels;
    std::vector<std::string> segments;
    std::filesystem::path weights;
    std::filesystem::path cache;
    CacheMode cache_mode = CacheMode::lazy;
    std::filesystem::path inner;
    RemoteOptions remote;
    bool check_meta = true;
};

BackendDescriptor descriptor_from_config(const Json& config, const std::filesystem::path& base_dir);
BackendDescriptor load_backend_descriptor(const std::filesystem::path& path);

/// Instantiates the backend. A non-cache descriptor with a `cache` path is
/// wrapped in a lazy CachedBackend over that file.
std::shared_ptr<const Backend> make_backend(const BackendDescriptor& descriptor);
std::shared_ptr<const Backend> load_backend(const std::filesystem::path& descriptor_path);

}  // namespace tokenaudit
