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

#include <tokenaudit/score_cache.hpp>

#include <bit>
#include <cstdio>
#include <mutex>

#include <tokenaudit/errors.hpp>
#include <tokenaudit/jsonl.hpp>

namespace tokenaudit {
namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

OrderedJson record_for(const CacheKey& key, const ScoreVector& scores) {
    OrderedJson omit = nullptr;
    if (key.omit) omit = OrderedJson{{"segment", key.omit->segment}, {"position", key.omit->position}};
    return OrderedJson{{"backend", key.backend},
                       {"instance", key.instance},
                       {"omit", std::move(omit)},
                       {"logits", scores.logits},
                       {"checksum", cache_checksum(key, scores)}};
}

// Parses one cache line; std::nullopt if the line is not a well-formed record.
std::optional<std::pair<CacheKey, ScoreVector>> parse_record(const std::string& line, std::string& checksum) {
    Json rec;
    try {
        rec = Json::parse(line);
    } catch (const Json::parse_error&) {
        return std::nullopt;
    }
    try {
        CacheKey key{rec.at("backend").get<std::string>(), rec.at("instance").get<std::string>(), std::nullopt};
        const auto& omit = rec.at("omit");
        if (!omit.is_null()) key.omit = OmissionSpec{omit.at("segment").get<std::string>(), omit.at("position").get<std::size_t>()};
        ScoreVector v{rec.at("logits").get<std::vector<double>>()};
        checksum = rec.at("checksum").get<std::string>();
        return std::make_pair(std::move(key), std::move(v));
    } catch (const Json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

std::string CacheKey::canonical() const {
    std::string out = backend;
    out.push_back('\x1f');
    out += instance;
    out.push_back('\x1f');
    if (omit) {
        out += omit->segment;
        out.push_back('\x1e');
        out += std::to_string(omit->position);
    } else {
        out += "full";
    }
    return out;
}

std::string cache_checksum(const CacheKey& key, const ScoreVector& scores) {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, key.canonical());
    for (double x : scores.logits) {
        fnv_mix(h, "\x1d");
        fnv_mix(h, hex64(std::bit_cast<std::uint64_t>(x)));
    }
    return hex64(h);
}

ScoreCache::ScoreCache(const std::filesystem::path& path) : path_(path) {
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        const std::string text = read_text(path);
        std::size_t start = 0;
        std::size_t line_no = 0;
        std::size_t good_end = 0;
        while (start < text.size()) {
            const std::size_t nl = text.find('\n', start);
            ++line_no;
            const bool terminated = nl != std::string::npos;
            std::string line = text.substr(start, terminated ? nl - start : std::string::npos);
            const std::size_t next = terminated ? nl + 1 : text.size();
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                start = next;
                if (terminated) good_end = next;
                continue;
            }
            std::string checksum;
            auto parsed = parse_record(line, checksum);
            if (!parsed) {
                if (!terminated) break;  // torn tail from an interrupted append
                throw Error(ErrorCode::cache_corrupt, path.string() + ":" + std::to_string(line_no) + ": malformed record");
            }
            auto& [key, scores] = *parsed;
            if (cache_checksum(key, scores) != checksum) {
                throw Error(ErrorCode::cache_corrupt, path.string() + ":" + std::to_string(line_no) + ": checksum mismatch");
            }
            auto [it, inserted] = entries_.emplace(key.canonical(), scores);
            if (!inserted && it->second != scores) {
                throw Error(ErrorCode::cache_corrupt,
                            path.string() + ":" + std::to_string(line_no) + ": conflicting duplicate entry");
            }
            start = next;
            good_end = next;
            if (!terminated) {
                // Valid final record without newline; restore the terminator.
                std::ofstream fix(path, std::ios::binary | std::ios::app);
                fix.put('\n');
                good_end = text.size() + 1;
            }
        }
        if (good_end < text.size()) std::filesystem::resize_file(path, good_end);
    } else if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorCode::io_error, "cannot open cache " + path.string());
}

std::optional<ScoreVector> ScoreCache::get(const CacheKey& key) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key.canonical());
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

ScoreVector ScoreCache::at(const CacheKey& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorCode::cache_miss, key.canonical());
    return std::move(*v);
}

void ScoreCache::put(const CacheKey& key, const ScoreVector& scores) {
    if (key.backend.empty() || key.instance.empty()) {
        throw Error(ErrorCode::invalid_argument, "cache key components must be non-empty");
    }
    if (key.omit && key.omit->segment.empty()) throw Error(ErrorCode::invalid_argument, "omission segment is empty");
    std::unique_lock lock(mutex_);
    auto [it, inserted] = entries_.emplace(key.canonical(), scores);
    if (!inserted) {
        if (it->second == scores) return;
        throw Error(ErrorCode::cache_conflict, "different logits for existing key " + key.canonical());
    }
    if (path_) {
        const std::string line = record_for(key, scores).dump();
        out_.write(line.data(), static_cast<std::streamsize>(line.size()));
        out_.put('\n');
        out_.flush();
        if (!out_) throw Error(ErrorCode::io_error, "cache append failed on " + path_->string());
    }
}

std::size_t ScoreCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

CachedBackend::CachedBackend(std::shared_ptr<ScoreCache> cache, std::shared_ptr<const Backend> inner, CacheMode mode)
    : cache_(std::move(cache)), inner_(std::move(inner)), mode_(mode) {
    if (!cache_) throw Error(ErrorCode::invalid_argument, "cached backend needs a cache");
    if (!inner_) throw Error(ErrorCode::invalid_argument, "cached backend needs an inner backend");
    id_ = inner_->id();
    labels_ = inner_->labels();
    const auto consumed = inner_->consumed_segments();
    consumed_.assign(consumed.begin(), consumed.end());
}

CachedBackend::CachedBackend(std::shared_ptr<ScoreCache> cache, std::string id, LabelSet labels,
                             std::vector<std::string> consumed)
    : cache_(std::move(cache)),
      mode_(CacheMode::strict),
      id_(std::move(id)),
      labels_(std::move(labels)),
      consumed_(std::move(consumed)) {
    if (!cache_) throw Error(ErrorCode::invalid_argument, "cached backend needs a cache");
    if (id_.empty()) throw Error(ErrorCode::invalid_argument, "backend id is empty");
}

std::vector<ScoreVector> CachedBackend::do_score(std::span<const ScoreInput> inputs) const {
    std::vector<ScoreVector> out(inputs.size());
    std::vector<std::size_t> missing;
    std::vector<ScoreInput> forwarded;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& input = inputs[i];
        if (input.key) {
            const CacheKey key{id_, input.key->instance, input.key->omit};
            if (auto hit = cache_->get(key)) {
                out[i] = std::move(*hit);
                hits_.fetch_add(1, std::memory_order_relaxed);
                continue;
            }
            misses_.fetch_add(1, std::memory_order_relaxed);
            if (mode_ == CacheMode::strict) throw Error(ErrorCode::cache_miss, key.canonical());
        } else if (mode_ == CacheMode::strict || !inner_) {
            throw Error(ErrorCode::cache_miss, "unkeyed input cannot be served from the cache");
        }
        missing.push_back(i);
        forwarded.push_back(input);
    }
    if (!forwarded.empty()) {
        auto scored = inner_->score_batch(forwarded);
        for (std::size_t k = 0; k < missing.size(); ++k) {
            const auto& input = inputs[missing[k]];
            if (input.key) cache_->put(CacheKey{id_, input.key->instance, input.key->omit}, scored[k]);
            out[missing[k]] = std::move(scored[k]);
        }
    }
    return out;
}

}  // namespace tokenaudit
