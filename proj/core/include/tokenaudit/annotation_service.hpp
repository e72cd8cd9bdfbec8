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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <tokenaudit/annotation.hpp>
#include <tokenaudit/attribution.hpp>
#include <tokenaudit/calibration.hpp>

namespace tokenaudit {

/// Server-side state of an annotation run: which annotator still owes which
/// task, and the append-only annotation file that records every judgment.
///
/// Judgments are appended and flushed before judge() returns, so a restarted
/// session replays the file and resumes where it stopped.
class AnnotationSession {
public:
    using Clock = std::function<std::string()>;

    /// Throws corrupt_annotation_file when the existing file holds records for
    /// tasks or annotators outside the plan, or repeated (instance, annotator) pairs.
    AnnotationSession(std::vector<AnnotationTaskSpec> tasks, std::filesystem::path annotation_file,
                      Clock clock = {});

    /// Next task in plan order this annotator has not judged.
    std::optional<AnnotationTaskSpec> next_for(const std::string& annotator) const;

    /// Records a judgment. Re-submitting the stored value returns it unchanged;
    /// a conflicting value raises already_judged and leaves the file untouched.
    AnnotationRecord judge(const std::string& task, const std::string& annotator, Judgment judgment);

    std::optional<AnnotationRecord> judgment_of(const std::string& task, const std::string& annotator) const;
    bool done(const std::string& task) const;
    bool knows_annotator(const std::string& annotator) const;
    std::size_t remaining_for(const std::string& annotator) const;
    std::size_t judgment_count() const;

    const std::vector<AnnotationTaskSpec>& tasks() const noexcept { return tasks_; }

private:
    const AnnotationTaskSpec& task(const std::string& id) const;

    std::vector<AnnotationTaskSpec> tasks_;
    std::unordered_map<std::string, std::size_t> by_task_;
    std::filesystem::path path_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, AnnotationRecord> judged_;  // (instance, annotator)
};

/// What an annotator sees for one instance: tokens with both models'
/// normalized effects, gold label and (unless hidden) predictions. The
/// similarity score is never included.
Json task_payload(const AttributionVector& main, const AttributionVector& biased, const LabelSet& labels,
                  bool hide_predictions);

struct AnnotationServerOptions {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    bool hide_predictions = false;
    std::filesystem::path static_dir;  // optional UI assets served at /
};

/// HTTP binding of an AnnotationSession:
///   GET  /tasks/next?annotator=NAME
///   GET  /tasks?annotator=NAME
///   POST /tasks/{id}/judgment   {"annotator": ..., "judgment": "similar"|"different"}
class AnnotationServer {
public:
    AnnotationServer(AnnotationSession& session, std::unordered_map<std::string, Json> payloads,
                     AnnotationServerOptions options);
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds the socket and returns the port. Throws port_in_use.
    int bind();
    /// Serves until stop(); bind() must have succeeded.
    void listen();
    /// bind() + listen() on a background thread.
    int start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tokenaudit
