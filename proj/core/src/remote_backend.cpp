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

#include <tokenaudit/remote_backend.hpp>

#include <algorithm>

#include <httplib.h>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {
namespace {

std::string normalise_endpoint(const std::string& endpoint) {
    if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0) return endpoint;
    return "http://" + endpoint;
}

httplib::Client make_client(const RemoteOptions& options) {
    httplib::Client client(normalise_endpoint(options.endpoint));
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client;
}

Json parse_body(const std::string& body, const std::string& what) {
    try {
        return Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::schema_violation, what + ": " + e.what());
    }
}

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
    ~SlotGuard() { s_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<1024>& s_;
};

}  // namespace

Json make_score_request(std::span<const ScoreInput> inputs) {
    Json instances = Json::array();
    for (const auto& input : inputs) {
        Json texts = Json::array();
        for (const auto& seg : input.segments) texts.push_back(seg.text);
        instances.push_back(Json{{"segments", std::move(texts)}});
    }
    return Json{{"instances", std::move(instances)}};
}

std::vector<ScoreVector> parse_score_response(const Json& body, std::size_t expected_inputs, std::size_t classes) {
    if (!body.is_object() || !body.contains("logits") || !body.at("logits").is_array()) {
        throw Error(ErrorCode::schema_violation, "score response lacks a 'logits' array");
    }
    const auto& rows = body.at("logits");
    if (rows.size() != expected_inputs) {
        throw Error(ErrorCode::dimension_mismatch, "score response has " + std::to_string(rows.size()) +
                                                       " rows for " + std::to_string(expected_inputs) + " inputs");
    }
    std::vector<ScoreVector> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (!row.is_array()) throw Error(ErrorCode::schema_violation, "score response row is not an array");
        if (row.size() != classes) {
            throw Error(ErrorCode::dimension_mismatch, "score response row has " + std::to_string(row.size()) +
                                                           " logits for " + std::to_string(classes) + " classes");
        }
        ScoreVector v;
        v.logits.reserve(classes);
        for (const auto& x : row) {
            if (!x.is_number()) throw Error(ErrorCode::schema_violation, "non-numeric logit in score response");
            v.logits.push_back(x.get<double>());
        }
        out.push_back(std::move(v));
    }
    return out;
}

RemoteMeta parse_meta_response(const Json& body) {
    if (!body.is_object() || !body.contains("labels") || !body.at("labels").is_array()) {
        throw Error(ErrorCode::schema_violation, "meta response lacks a 'labels' array");
    }
    RemoteMeta meta;
    for (const auto& l : body.at("labels")) {
        if (!l.is_string()) throw Error(ErrorCode::schema_violation, "meta labels must be strings");
        meta.labels.push_back(l.get<std::string>());
    }
    meta.model_id = body.value("model_id", std::string{});
    return meta;
}

RemoteMeta fetch_meta(const RemoteOptions& options) {
    auto client = make_client(options);
    auto res = client.Get("/v1/meta");
    if (!res) {
        throw Error(ErrorCode::backend_unreachable, options.endpoint + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::backend_unreachable, options.endpoint + "/v1/meta returned HTTP " + std::to_string(res->status));
    }
    return parse_meta_response(parse_body(res->body, "meta response"));
}

RemoteBackend::RemoteBackend(std::string id, LabelSet labels, RemoteOptions options, std::vector<std::string> consumed)
    : id_(std::move(id)),
      labels_(std::move(labels)),
      options_(std::move(options)),
      consumed_(std::move(consumed)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, 1024))) {
    if (id_.empty()) throw Error(ErrorCode::invalid_argument, "backend id is empty");
    if (options_.endpoint.empty()) throw Error(ErrorCode::invalid_argument, "remote backend '" + id_ + "' has no endpoint");
    options_.max_in_flight = std::clamp<std::size_t>(options_.max_in_flight, 1, 1024);
    if (options_.batch_size == 0) options_.batch_size = 1;
}

RemoteMeta RemoteBackend::verify_meta() const {
    auto meta = fetch_meta(options_);
    if (meta.labels != labels_.names()) {
        std::string got;
        for (const auto& l : meta.labels) got += (got.empty() ? "" : ",") + l;
        throw Error(ErrorCode::label_mismatch, "remote '" + id_ + "' serves labels [" + got + "]");
    }
    return meta;
}

std::vector<ScoreVector> RemoteBackend::do_score(std::span<const ScoreInput> inputs) const {
    std::vector<ScoreVector> out;
    out.reserve(inputs.size());
    for (std::size_t begin = 0; begin < inputs.size(); begin += options_.batch_size) {
        const auto chunk = inputs.subspan(begin, std::min(options_.batch_size, inputs.size() - begin));
        const std::string body = make_score_request(chunk).dump();
        httplib::Result res;
        {
            SlotGuard slot(slots_);
            auto client = make_client(options_);
            res = client.Post("/v1/score", body, "application/json");
            requests_.fetch_add(1, std::memory_order_relaxed);
        }
        if (!res) {
            throw Error(ErrorCode::backend_unreachable, options_.endpoint + ": " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorCode::backend_unreachable,
                        options_.endpoint + "/v1/score returned HTTP " + std::to_string(res->status));
        }
        auto scored = parse_score_response(parse_body(res->body, "score response"), chunk.size(), labels_.size());
        std::move(scored.begin(), scored.end(), std::back_inserter(out));
    }
    return out;
}

}  // namespace tokenaudit
