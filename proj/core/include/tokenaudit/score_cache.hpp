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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include <tokenaudit/backend.hpp>

namespace tokenaudit {

struct CacheKey {
    std::string backend;
    std::string instance;
    std::optional<OmissionSpec> omit;

    /// Stable textual address of the key; used as the content address.
    std::string canonical() const;

    friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

/// FNV-1a (64-bit) over the key address and the exact bit patterns of the logits.
std::string cache_checksum(const CacheKey& key, const ScoreVector& scores);

/// Append-only persistent store of score vectors.
///
/// File format: JSONL of {"backend","instance","omit":{"segment","position"}|null,
/// "logits":[...],"checksum"}. Doubles are written in shortest round-trip form so
/// get() after put() is bit-exact, including across process restarts. A torn
/// final line (no trailing newline) left by an interrupted writer is dropped on
/// open; any other damage raises cache_corrupt.
///
/// Readers run concurrently; appends are serialized.
class ScoreCache {
public:
    /// In-memory cache with no backing file.
    ScoreCache() = default;
    explicit ScoreCache(const std::filesystem::path& path);

    std::optional<ScoreVector> get(const CacheKey& key) const;
    /// Throws cache_miss when absent.
    ScoreVector at(const CacheKey& key) const;

    /// Stores a vector. Re-putting an identical vector is a no-op; a different
    /// vector for an existing key raises cache_conflict (the backend is not
    /// deterministic).
    void put(const CacheKey& key, const ScoreVector& scores);

    std::size_t size() const;
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, ScoreVector> entries_;
    std::ofstream out_;
};

enum class CacheMode {
    strict,  // offline audit: a miss is an error
    lazy,    // a miss falls through to the wrapped backend and is back-filled
};

/// Backend that answers keyed inputs from a ScoreCache.
class CachedBackend final : public Backend {
public:
    CachedBackend(std::shared_ptr<ScoreCache> cache, std::shared_ptr<const Backend> inner, CacheMode mode);
    /// Strict offline backend with no underlying model.
    CachedBackend(std::shared_ptr<ScoreCache> cache, std::string id, LabelSet labels,
                  std::vector<std::string> consumed = {});

    const std::string& id() const noexcept override { return id_; }
    const LabelSet& labels() const noexcept override { return labels_; }
    std::span<const std::string> consumed_segments() const noexcept override { return consumed_; }
    std::size_t max_in_flight() const noexcept override { return inner_ ? inner_->max_in_flight() : 64; }

    CacheMode mode() const noexcept { return mode_; }
    std::uint64_t hits() const noexcept { return hits_.load(); }
    std::uint64_t misses() const noexcept { return misses_.load(); }

protected:
    std::vector<ScoreVector> do_score(std::span<const ScoreInput> inputs) const override;

private:
    std::shared_ptr<ScoreCache> cache_;
    std::shared_ptr<const Backend> inner_;
    CacheMode mode_;
    std::string id_;
    LabelSet labels_;
    std::vector<std::string> consumed_;
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

}  // namespace tokenaudit
