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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <tokenaudit/agreement.hpp>

namespace tokenaudit {

/// "different" is the negative class of the calibration classifier.
enum class Judgment { similar, different };

std::string_view to_string(Judgment j) noexcept;
Judgment judgment_from_string(std::string_view name);

struct AnnotationRecord {
    std::string instance;
    std::string annotator;
    Judgment judgment = Judgment::similar;
    std::string timestamp;  // ISO-8601; optional in hand-written files

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

OrderedJson annotation_to_json(const AnnotationRecord& r);
AnnotationRecord annotation_from_json(const Json& record, const std::string& where);

/// Reads an annotation JSONL file; (instance, annotator) pairs must be unique.
std::vector<AnnotationRecord> read_annotation_file(const std::filesystem::path& path);
void write_annotation_file(const std::filesystem::path& path, const std::vector<AnnotationRecord>& records);

struct OverlapAgreement {
    std::size_t shared = 0;  // instances judged by two or more annotators
    std::size_t agreed = 0;  // of those, instances where every judgment matches

    double accuracy() const { return shared ? static_cast<double>(agreed) / static_cast<double>(shared) : 0.0; }
};

OverlapAgreement overlap_agreement(const std::vector<AnnotationRecord>& annotations);
/// Inter-annotator agreement as plain accuracy on shared instances. Throws no_overlap.
double iaa(const std::vector<AnnotationRecord>& annotations);

/// One human-labelled similarity. positive = judged "similar".
struct LabeledSimilarity {
    double similarity = 0.0;
    bool positive = false;
};

struct LabelJoin {
    std::vector<LabeledSimilarity> labeled;
    std::vector<std::string> instances;  // parallel to labeled
    std::size_t unscored = 0;            // annotated, but no defined similarity
    std::size_t unknown = 0;             // annotated, not in the agreement records
};

/// One label per annotated instance: the majority judgment, with ties going to
/// the judgment recorded first in the file.
LabelJoin join_labels(const std::vector<AgreementRecord>& records, const std::vector<AnnotationRecord>& annotations);

}  // namespace tokenaudit
