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

#include <tokenaudit/annotation_service.hpp>

#include <chrono>
#include <ctime>
#include <set>

#include <httplib.h>

#include <tokenaudit/heatmap.hpp>

namespace tokenaudit {
namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool assigned(const AnnotationTaskSpec& t, const std::string& annotator) {
    return std::find(t.annotators.begin(), t.annotators.end(), annotator) != t.annotators.end();
}

}  // namespace

AnnotationSession::AnnotationSession(std::vector<AnnotationTaskSpec> tasks, std::filesystem::path annotation_file,
                                     Clock clock)
    : tasks_(std::move(tasks)), path_(std::move(annotation_file)), clock_(clock ? std::move(clock) : Clock(utc_now)) {
    std::set<std::string> instances;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        if (!by_task_.emplace(tasks_[i].task, i).second) {
            throw Error(ErrorCode::duplicate_id, "task '" + tasks_[i].task + "' appears twice");
        }
        if (!instances.insert(tasks_[i].instance).second) {
            throw Error(ErrorCode::duplicate_id, "instance '" + tasks_[i].instance + "' has two tasks");
        }
    }
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return;

    std::unordered_map<std::string, std::size_t> by_instance;
    for (std::size_t i = 0; i < tasks_.size(); ++i) by_instance.emplace(tasks_[i].instance, i);
    std::vector<AnnotationRecord> existing;
    try {
        existing = read_annotation_file(path_);
    } catch (const Error& e) {
        throw Error(ErrorCode::corrupt_annotation_file, e.what());
    }
    for (auto& r : existing) {
        const auto it = by_instance.find(r.instance);
        if (it == by_instance.end()) {
            throw Error(ErrorCode::corrupt_annotation_file, "judgment for instance '" + r.instance + "' outside the plan");
        }
        if (!assigned(tasks_[it->second], r.annotator)) {
            throw Error(ErrorCode::corrupt_annotation_file,
                        "'" + r.annotator + "' judged '" + r.instance + "' without being assigned");
        }
        judged_.emplace(std::make_pair(r.instance, r.annotator), std::move(r));
    }
}

const AnnotationTaskSpec& AnnotationSession::task(const std::string& id) const {
    const auto it = by_task_.find(id);
    if (it == by_task_.end()) throw Error(ErrorCode::unknown_task, id);
    return tasks_[it->second];
}

std::optional<AnnotationTaskSpec> AnnotationSession::next_for(const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    for (const auto& t : tasks_) {
        if (assigned(t, annotator) && !judged_.count({t.instance, annotator})) return t;
    }
    return std::nullopt;
}

AnnotationRecord AnnotationSession::judge(const std::string& task_id, const std::string& annotator, Judgment judgment) {
    std::lock_guard lock(mutex_);
    const auto& t = task(task_id);
    if (!assigned(t, annotator)) {
        throw Error(ErrorCode::not_assigned, "'" + annotator + "' is not assigned task '" + task_id + "'");
    }
    const auto key = std::make_pair(t.instance, annotator);
    if (const auto it = judged_.find(key); it != judged_.end()) {
        if (it->second.judgment == judgment) return it->second;
        throw Error(ErrorCode::already_judged,
                    "task '" + task_id + "' already judged '" + std::string(to_string(it->second.judgment)) + "'");
    }
    AnnotationRecord r{t.instance, annotator, judgment, clock_()};
    JsonlWriter(path_, JsonlWriter::Mode::append).write(annotation_to_json(r));
    judged_.emplace(key, r);
    return r;
}

std::optional<AnnotationRecord> AnnotationSession::judgment_of(const std::string& task_id,
                                                               const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    const auto it = judged_.find({task(task_id).instance, annotator});
    if (it == judged_.end()) return std::nullopt;
    return it->second;
}

bool AnnotationSession::done(const std::string& task_id) const {
    std::lock_guard lock(mutex_);
    const auto& t = task(task_id);
    return std::all_of(t.annotators.begin(), t.annotators.end(),
                       [&](const std::string& a) { return judged_.count({t.instance, a}) > 0; });
}

bool AnnotationSession::knows_annotator(const std::string& annotator) const {
    return std::any_of(tasks_.begin(), tasks_.end(), [&](const auto& t) { return assigned(t, annotator); });
}

std::size_t AnnotationSession::remaining_for(const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(std::count_if(tasks_.begin(), tasks_.end(), [&](const auto& t) {
        return assigned(t, annotator) && !judged_.count({t.instance, annotator});
    }));
}

std::size_t AnnotationSession::judgment_count() const {
    std::lock_guard lock(mutex_);
    return judged_.size();
}

Json task_payload(const AttributionVector& main, const AttributionVector& biased, const LabelSet& labels,
                  bool hide_predictions) {
    if (main.tokens != biased.tokens) {
        throw Error(ErrorCode::alignment_failure, "token lists differ for instance '" + main.instance + "'");
    }
    Json tokens = Json::array();
    for (const auto& t : main.tokens) tokens.push_back(Json{{"segment", t.segment}, {"pos", t.position}, {"text", t.text}});
    auto pane = [&](const AttributionVector& v) {
        Json p{{"intensities", normalized_intensities(v.effects)}};
        if (!hide_predictions) p["predicted"] = labels.name(v.predicted);
        return p;
    };
    return Json{{"instance", main.instance},
                {"gold", labels.name(main.gold)},
                {"tokens", std::move(tokens)},
                {"main", pane(main)},
                {"biased", pane(biased)}};
}

struct AnnotationServer::Impl {
    AnnotationSession& session;
    std::unordered_map<std::string, Json> payloads;
    AnnotationServerOptions options;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    Impl(AnnotationSession& s, std::unordered_map<std::string, Json> p, AnnotationServerOptions o)
        : session(s), payloads(std::move(p)), options(std::move(o)) {}

    static void reply(httplib::Response& res, int status, const Json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void reply_error(httplib::Response& res, const Error& e) {
        int status = 400;
        switch (e.code()) {
            case ErrorCode::not_assigned: status = 403; break;
            case ErrorCode::unknown_task: status = 404; break;
            case ErrorCode::already_judged: status = 409; break;
            case ErrorCode::io_error: status = 500; break;
            default: break;
        }
        reply(res, status, Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
    }

    Json task_json(const AnnotationTaskSpec& t, const std::string& annotator) const {
        Json j{{"task", t.task}, {"instance", t.instance}, {"annotators", t.annotators}, {"overlap", t.overlap}};
        const auto it = payloads.find(t.instance);
        j["payload"] = it == payloads.end() ? Json(nullptr) : it->second;
        const auto stored = session.judgment_of(t.task, annotator);
        j["status"] = stored ? "done" : "pending";
        if (stored) j["judgment"] = std::string(to_string(stored->judgment));
        return j;
    }

    void routes() {
        server.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, Json{{"ok", true}}); });

        server.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string annotator = req.get_param_value("annotator");
            if (annotator.empty() || !session.knows_annotator(annotator)) {
                reply_error(res, Error(ErrorCode::not_assigned, "unknown annotator '" + annotator + "'"));
                return;
            }
            const auto next = session.next_for(annotator);
            if (!next) {
                reply(res, 200, Json{{"done", true}, {"remaining", 0}});
                return;
            }
            Json j = task_json(*next, annotator);
            j["done"] = false;
            j["remaining"] = session.remaining_for(annotator);
            reply(res, 200, j);
        });

        server.Get("/tasks", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string annotator = req.get_param_value("annotator");
            Json list = Json::array();
            for (const auto& t : session.tasks()) {
                if (!annotator.empty() && std::find(t.annotators.begin(), t.annotators.end(), annotator) == t.annotators.end()) {
                    continue;
                }
                Json j{{"task", t.task}, {"instance", t.instance}, {"annotators", t.annotators}, {"done", session.done(t.task)}};
                if (!annotator.empty()) {
                    const auto stored = session.judgment_of(t.task, annotator);
                    j["status"] = stored ? "done" : "pending";
                }
                list.push_back(std::move(j));
            }
            reply(res, 200, Json{{"tasks", std::move(list)}});
        });

        server.Post(R"(/tasks/([^/]+)/judgment)", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string task_id = req.matches[1].str();
            std::string annotator;
            try {
                const Json body = Json::parse(req.body, nullptr, false);
                if (!body.is_object() || !body.contains("annotator") || !body.contains("judgment") ||
                    !body.at("annotator").is_string() || !body.at("judgment").is_string()) {
                    throw Error(ErrorCode::schema_violation, "body must be {annotator, judgment}");
                }
                annotator = body.at("annotator").get<std::string>();
                const auto record =
                    session.judge(task_id, annotator, judgment_from_string(body.at("judgment").get<std::string>()));
                reply(res, 200, annotation_to_json(record));
            } catch (const Error& e) {
                reply_error(res, e);
                if (e.code() == ErrorCode::already_judged) {
                    if (const auto stored = session.judgment_of(task_id, annotator)) {
                        auto j = Json::parse(res.body);
                        j["stored"] = annotation_to_json(*stored);
                        res.set_content(j.dump(), "application/json");
                    }
                }
            }
        });

        if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir.string());
    }
};

AnnotationServer::AnnotationServer(AnnotationSession& session, std::unordered_map<std::string, Json> payloads,
                                   AnnotationServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(payloads), std::move(options))) {
    // httplib also sets SO_REUSEPORT by default, which would let a second
    // server share a port that is already serving.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
    if (impl_->options.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    } else {
        impl_->port = impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
    }
    if (impl_->port < 0) {
        throw Error(ErrorCode::port_in_use, impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    return impl_->port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

int AnnotationServer::start() {
    const int port = bind();
    impl_->thread = std::thread([this] { listen(); });
    impl_->server.wait_until_ready();
    return port;
}

void AnnotationServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tokenaudit
