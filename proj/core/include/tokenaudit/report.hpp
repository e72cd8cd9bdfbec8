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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <tokenaudit/agreement.hpp>
#include <tokenaudit/calibration.hpp>
#include <tokenaudit/corpus.hpp>

namespace tokenaudit {

/// "9815" -> "9,815".
std::string format_count(std::size_t n);
/// One decimal place, e.g. 54.8.
std::string format_percent(double percent);
/// Table cell "count (percent of base)", e.g. "5,381 (54.8)". A zero base prints "(0.0)".
std::string format_count_percent(std::size_t count, std::size_t base);

enum class Subset { total, easy, different };

std::string_view to_string(Subset s) noexcept;
Subset subset_from_string(std::string_view name);

struct LabelDistribution {
    Subset subset = Subset::total;
    std::size_t size = 0;
    std::vector<std::size_t> counts;  // per label
    std::vector<double> fractions;    // per label; empty when size == 0

    bool empty() const noexcept { return size == 0; }
};

/// Label shares over the whole corpus, its easy instances, or the easy
/// instances below `threshold`. An empty subset is reported with no fractions.
LabelDistribution label_distribution(Subset subset, const Corpus& corpus, const std::vector<AgreementRecord>& records,
                                     double threshold);

struct AuditSummary {
    std::string setting;
    std::string dataset;
    std::string split;
    std::vector<std::string> labels;
    std::size_t corpus_size = 0;
    std::size_t paired = 0;  // instances with both attributions
    std::size_t easy = 0;
    std::size_t different = 0;
    std::size_t scored = 0;
    double threshold = 0.0;
    double f1_negative = 0.0;
    std::optional<double> auc;
    std::optional<double> iaa;
    std::map<std::string, std::size_t> degenerate;  // flag -> count among easy instances
    std::array<LabelDistribution, 3> distributions;  // total, easy, different

    double easy_percent() const;       // of corpus
    double different_percent() const;  // of easy
};

/// Throws input_mismatch when records name instances absent from the corpus or
/// disagree with its gold labels.
AuditSummary build_summary(std::string setting, const Corpus& corpus, const std::vector<AgreementRecord>& records,
                           const CalibrationResult& calibration);

OrderedJson summary_to_json(const AuditSummary& s);
/// Plain-text table in the "Easy / F1 / Different" layout, one row per summary.
std::string summary_table(const std::vector<AuditSummary>& summaries);
/// Self-contained HTML report page.
std::string summary_html(const AuditSummary& s);

std::string html_escape(std::string_view text);

}  // namespace tokenaudit
