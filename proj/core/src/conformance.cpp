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

#include <tokenaudit/conformance.hpp>

#include <set>

#include <httplib.h>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {
namespace {

std::vector<ScoreInput> to_inputs(const std::vector<std::vector<std::string>>& texts) {
    std::vector<ScoreInput> out;
    for (const auto& row : texts) {
        ScoreInput in;
        for (std::size_t i = 0; i < row.size(); ++i) in.segments.push_back({"s" + std::to_string(i), row[i]});
        out.push_back(std::move(in));
    }
    return out;
}

class Prober {
public:
    explicit Prober(const RemoteOptions& options) : options_(options) {}

    std::vector<ScoreVector> score(const std::vector<ScoreInput>& inputs, std::size_t classes) {
        httplib::Client client(endpoint());
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(options_.timeout).count());
        auto res = client.Post("/v1/score", make_score_request(inputs).dump(), "application/json");
        if (!res) throw Error(ErrorCode::backend_unreachable, httplib::to_string(res.error()));
        if (res->status != 200) throw Error(ErrorCode::backend_unreachable, "HTTP " + std::to_string(res->status));
        return parse_score_response(Json::parse(res->body), inputs.size(), classes);
    }

    int post_raw(const std::string& body) {
        httplib::Client client(endpoint());
        auto res = client.Post("/v1/score", body, "application/json");
        if (!res) throw Error(ErrorCode::backend_unreachable, httplib::to_string(res.error()));
        return res->status;
    }

private:
    std::string endpoint() const {
        const auto& e = options_.endpoint;
        return e.rfind("http", 0) == 0 ? e : "http://" + e;
    }

    const RemoteOptions& options_;
};

template <typename F>
ConformanceCheck run_check(const std::string& name, F&& body) {
    ConformanceCheck check{name, false, {}};
    try {
        check.detail = body();
        check.passed = check.detail.empty();
    } catch (const std::exception& e) {
        check.detail = e.what();
    }
    return check;
}

}  // namespace

std::vector<ConformanceCheck> run_conformance(const RemoteOptions& options, const ConformanceProbe& probe) {
    std::vector<ConformanceCheck> checks;
    Prober prober(options);
    const auto inputs = to_inputs(probe.inputs);
    std::size_t classes = 0;

    checks.push_back(run_check("meta-schema", [&]() -> std::string {
        const auto meta = fetch_meta(options);
        if (meta.labels.empty()) return "no labels";
        if (std::set<std::string>(meta.labels.begin(), meta.labels.end()).size() != meta.labels.size()) {
            return "duplicate labels";
        }
        if (!probe.expected_labels.empty() && meta.labels != probe.expected_labels) return "label order differs";
        classes = meta.labels.size();
        return {};
    }));
    if (!checks.back().passed) return checks;
    if (inputs.empty()) {
        checks.push_back({"score-schema", false, "no probe inputs"});
        return checks;
    }

    std::vector<ScoreVector> first;
    checks.push_back(run_check("score-schema", [&]() -> std::string {
        first = prober.score(inputs, classes);
        return {};
    }));
    checks.push_back(run_check("dimension", [&]() -> std::string {
        for (const auto& v : first) {
            if (v.size() != classes) return "row length differs from label count";
        }
        return first.size() == inputs.size() ? std::string{} : "row count differs from input count";
    }));
    checks.push_back(run_check("determinism-repeat", [&]() -> std::string {
        return prober.score(inputs, classes) == first ? std::string{} : "repeated batch changed logits";
    }));
    checks.push_back(run_check("determinism-batch", [&]() -> std::string {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const auto single = prober.score({inputs[i]}, classes);
            if (single.front() != first[i]) return "input " + std::to_string(i) + " scored differently alone";
        }
        return {};
    }));
    checks.push_back(run_check("rejects-malformed", [&]() -> std::string {
        const int status = prober.post_raw(R"({"instances": 5})");
        return status >= 400 && status < 500 ? std::string{} : "malformed request got HTTP " + std::to_string(status);
    }));
    for (std::size_t seg : probe.ignored_segments) {
        checks.push_back(run_check("segment-invariance[" + std::to_string(seg) + "]", [&]() -> std::string {
            for (const char* replacement : {"", "zzz unrelated filler text"}) {
                auto perturbed = inputs;
                for (auto& in : perturbed) {
                    if (seg >= in.segments.size()) return "probe has no segment " + std::to_string(seg);
                    in.segments[seg].text = replacement;
                }
                if (prober.score(perturbed, classes) != first) return "logits depend on ignored segment";
            }
            return {};
        }));
    }
    return checks;
}

}  // namespace tokenaudit
