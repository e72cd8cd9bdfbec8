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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <tokenaudit/agreement.hpp>
#include <tokenaudit/annotation.hpp>

namespace tokenaudit {

/// How to draw instances for human judgment across the similarity scale.
struct SamplePlan {
    std::size_t bins = 20;
    std::vector<std::size_t> quotas;  // per bin; size must equal bins
    std::size_t overlap = 40;         // items judged by every annotator
    std::uint64_t seed = 0;
    std::vector<std::string> annotators{"a1", "a2"};

    /// Same quota in every bin.
    static SamplePlan with_quota(std::size_t quota, std::size_t bins = 20);
    /// Spreads `total` over the bins: total / bins each, the remainder to the lowest bins.
    static SamplePlan with_total(std::size_t total, std::size_t bins = 20);

    void validate() const;
};

struct AnnotationTaskSpec {
    std::string task;
    std::string instance;
    std::size_t bin = 0;
    double similarity = 0.0;
    std::vector<std::string> annotators;
    bool overlap = false;

    friend bool operator==(const AnnotationTaskSpec&, const AnnotationTaskSpec&) = default;
};

struct SampleResult {
    Histogram histogram;
    std::vector<std::size_t> bin_sizes;    // pool members per bin
    std::vector<std::size_t> per_bin;      // sampled per bin
    std::vector<std::size_t> overlap_per_bin;
    std::vector<AnnotationTaskSpec> tasks; // shuffled presentation order
};

/// Draws up to quota[b] easy, non-degenerate records uniformly from each
/// equal-width bin of the observed similarity range (bins with fewer members
/// give all of them), then marks `overlap` of them, apportioned across bins in
/// proportion to the per-bin sample counts, for every annotator. Remaining
/// tasks are dealt round-robin. Deterministic in plan.seed.
SampleResult sample_for_annotation(const std::vector<AgreementRecord>& records, const SamplePlan& plan);

OrderedJson task_to_json(const AnnotationTaskSpec& t);
AnnotationTaskSpec task_from_json(const Json& j, const std::string& where);
std::vector<AnnotationTaskSpec> read_task_file(const std::filesystem::path& path);
void write_task_file(const std::filesystem::path& path, const std::vector<AnnotationTaskSpec>& tasks);

/// Mann-Whitney AUC: probability that a positive outranks a negative, ties
/// counting one half. O(n log n). Throws single_class_input.
double auc(std::span<const LabeledSimilarity> labeled);

struct HoldoutMetrics {
    std::size_t size = 0;
    double f1_negative = 0.0;
    std::optional<double> auc;
};

struct CalibrationResult {
    double threshold = 0.0;
    double f1_negative = 0.0;
    double auc = 0.0;
    std::optional<double> iaa;
    std::size_t similar = 0;    // positive labels used for tuning
    std::size_t different = 0;  // negative labels used for tuning
    std::optional<HoldoutMetrics> holdout;
};

/// F1 of the "different" class when similarity < threshold predicts "different".
double negative_f1(std::span<const LabeledSimilarity> labeled, double threshold);

/// Picks the midpoint between consecutive distinct similarities that maximises
/// negative-class F1, smallest threshold on ties. Throws single_class_input.
CalibrationResult tune_threshold(std::span<const LabeledSimilarity> labeled);

/// Tunes on a seeded random (1 - fraction) split and reports metrics on the rest.
CalibrationResult tune_threshold_with_holdout(std::span<const LabeledSimilarity> labeled, double holdout_fraction,
                                              std::uint64_t seed);

Json calibration_to_json(const CalibrationResult& r);
CalibrationResult calibration_from_json(const Json& j);
CalibrationResult read_calibration_file(const std::filesystem::path& path);
void write_calibration_file(const std::filesystem::path& path, const CalibrationResult& r);

/// Split of the easy set at a threshold. Percentages are relative to the easy set.
struct Partition {
    double threshold = 0.0;
    std::size_t easy = 0;
    std::size_t scored = 0;      // easy with a defined similarity
    std::size_t degenerate = 0;  // easy without one
    std::size_t different = 0;
    std::size_t similar = 0;
    std::vector<std::string> different_ids;

    double different_percent() const;
};

Partition classify_different(const std::vector<AgreementRecord>& records, double threshold);

}  // namespace tokenaudit
