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

#include <tokenaudit/backend_factory.hpp>

#include <tokenaudit/config.hpp>
#include <tokenaudit/errors.hpp>
#include <tokenaudit/linear_models.hpp>

namespace tokenaudit {
namespace {

std::vector<std::string> strings_at(const Json& config, const char* key) {
    std::vector<std::string> out;
    if (!config.contains(key)) return out;
    const auto& arr = config.at(key);
    if (!arr.is_array()) throw Error(ErrorCode::schema_violation, std::string("descriptor '") + key + "' must be an array");
    for (const auto& v : arr) {
        if (!v.is_string()) throw Error(ErrorCode::schema_violation, std::string("descriptor '") + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::string string_at(const Json& config, const char* key) {
    if (!config.contains(key)) return {};
    if (!config.at(key).is_string()) throw Error(ErrorCode::schema_violation, std::string("descriptor '") + key + "' must be a string");
    return config.at(key).get<std::string>();
}

std::size_t count_at(const Json& config, const char* key, std::size_t fallback) {
    if (!config.contains(key)) return fallback;
    const auto& v = config.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw Error(ErrorCode::schema_violation, std::string("descriptor '") + key + "' must be a positive integer");
    }
    return v.get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string_view to_string(BackendKind kind) noexcept {
    switch (kind) {
        case BackendKind::lexicon: return "lexicon";
        case BackendKind::linear_bow: return "linear-bow";
        case BackendKind::cache: return "cache";
        case BackendKind::remote: return "remote";
    }
    return "unknown";
}

BackendKind backend_kind_from_string(std::string_view name) {
    if (name == "lexicon") return BackendKind::lexicon;
    if (name == "linear-bow") return BackendKind::linear_bow;
    if (name == "cache") return BackendKind::cache;
    if (name == "remote") return BackendKind::remote;
    throw Error(ErrorCode::schema_violation, "unknown backend kind '" + std::string(name) + "'");
}

BackendDescriptor descriptor_from_config(const Json& config, const std::filesystem::path& base_dir) {
    if (!config.is_object()) throw Error(ErrorCode::schema_violation, "backend descriptor must be a table");
    BackendDescriptor d;
    d.id = string_at(config, "id");
    if (d.id.empty()) throw Error(ErrorCode::schema_violation, "backend descriptor needs an 'id'");
    d.kind = backend_kind_from_string(string_at(config, "kind"));
    d.labels = LabelSet(strings_at(config, "labels"));
    d.segments = strings_at(config, "segments");
    d.weights = resolve(base_dir, string_at(config, "weights"));
    d.cache = resolve(base_dir, string_at(config, "cache"));
    d.inner = resolve(base_dir, string_at(config, "inner"));
    const std::string mode = string_at(config, "mode");
    if (mode.empty() || mode == "lazy") {
        d.cache_mode = CacheMode::lazy;
    } else if (mode == "strict") {
        d.cache_mode = CacheMode::strict;
    } else {
        throw Error(ErrorCode::schema_violation, "cache mode must be 'strict' or 'lazy'");
    }
    d.remote.endpoint = string_at(config, "endpoint");
    d.remote.max_in_flight = count_at(config, "max_in_flight", d.remote.max_in_flight);
    d.remote.batch_size = count_at(config, "batch_size", d.remote.batch_size);
    d.remote.timeout = std::chrono::milliseconds(count_at(config, "timeout_ms", 30000));
    if (config.contains("check_meta")) d.check_meta = config.at("check_meta").get<bool>();

    switch (d.kind) {
        case BackendKind::lexicon:
        case BackendKind::linear_bow:
            if (d.weights.empty()) throw Error(ErrorCode::schema_violation, "backend '" + d.id + "' needs 'weights'");
            break;
        case BackendKind::cache:
            if (d.cache.empty()) throw Error(ErrorCode::schema_violation, "backend '" + d.id + "' needs 'cache'");
            if (d.cache_mode == CacheMode::lazy && d.inner.empty()) {
                throw Error(ErrorCode::schema_violation, "lazy cache '" + d.id + "' needs an 'inner' descriptor");
            }
            break;
        case BackendKind::remote:
            if (d.remote.endpoint.empty()) throw Error(ErrorCode::schema_violation, "backend '" + d.id + "' needs 'endpoint'");
            break;
    }
    return d;
}

BackendDescriptor load_backend_descriptor(const std::filesystem::path& path) {
    try {
        return descriptor_from_config(load_config(path), path.parent_path());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::schema_violation) throw Error(e.code(), path.string() + ": " + e.what());
        throw;
    }
}

std::shared_ptr<const Backend> make_backend(const BackendDescriptor& d) {
    std::shared_ptr<const Backend> backend;
    switch (d.kind) {
        case BackendKind::lexicon:
            backend = LexiconModel::from_json(d.id, d.labels, read_json(d.weights), d.segments);
            break;
        case BackendKind::linear_bow:
            backend = LinearBowModel::from_json(d.id, d.labels, read_json(d.weights), d.segments);
            break;
        case BackendKind::remote: {
            auto remote = std::make_shared<RemoteBackend>(d.id, d.labels, d.remote, d.segments);
            if (d.check_meta) remote->verify_meta();
            backend = std::move(remote);
            break;
        }
        case BackendKind::cache: {
            auto cache = std::make_shared<ScoreCache>(d.cache);
            if (d.inner.empty()) {
                return std::make_shared<CachedBackend>(std::move(cache), d.id, d.labels, d.segments);
            }
            auto inner = load_backend(d.inner);
            if (inner->id() != d.id) {
                throw Error(ErrorCode::schema_violation,
                            "cache '" + d.id + "' wraps backend with different id '" + inner->id() + "'");
            }
            if (inner->labels() != d.labels) throw Error(ErrorCode::label_mismatch, "cache '" + d.id + "' label order differs from its inner backend");
            return std::make_shared<CachedBackend>(std::move(cache), std::move(inner), d.cache_mode);
        }
    }
    if (!d.cache.empty()) {
        return std::make_shared<CachedBackend>(std::make_shared<ScoreCache>(d.cache), std::move(backend), CacheMode::lazy);
    }
    return backend;
}

std::shared_ptr<const Backend> load_backend(const std::filesystem::path& descriptor_path) {
    return make_backend(load_backend_descriptor(descriptor_path));
}

}  // namespace tokenaudit
