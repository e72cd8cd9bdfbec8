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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <tokenaudit/attribution.hpp>

namespace tokenaudit {

enum class DegenerateFlag { none, zero_main, zero_biased, zero_both, empty_scope };

std::string_view to_string(DegenerateFlag flag) noexcept;
DegenerateFlag degenerate_flag_from_string(std::string_view name);

/// Both models' view of one instance. similarity is set only for easy,
/// non-degenerate instances.
struct AgreementRecord {
    std::string instance;
    std::size_t gold = 0;
    bool main_correct = false;
    bool biased_correct = false;
    bool easy = false;
    std::optional<double> similarity;
    DegenerateFlag degenerate = DegenerateFlag::none;

    bool scored() const noexcept { return similarity.has_value(); }

    friend bool operator==(const AgreementRecord&, const AgreementRecord&) = default;
};

/// Cosine similarity clamped to [-1, 1]. Throws length_mismatch on unequal or
/// empty inputs and zero_norm when either vector is all zeros.
double cosine(std::span<const double> u, std::span<const double> v);

struct PairingResult {
    std::vector<AgreementRecord> records;  // main-file order
    std::vector<std::string> only_main;
    std::vector<std::string> only_biased;

    bool full_coverage() const noexcept { return only_main.empty() && only_biased.empty(); }
};

/// Pairs the two models' vectors by instance id. Instances present in only one
/// input are listed, not scored. Throws alignment_failure when token lists
/// differ and input_mismatch when a vector's scope differs from `scope`.
PairingResult pair_and_score(const std::vector<AttributionVector>& main, const std::vector<AttributionVector>& biased,
                             const AttributionScope& scope);
PairingResult pair_and_score(const std::filesystem::path& main, const std::filesystem::path& biased,
                             const AttributionScope& scope);

/// Similarities of easy, non-degenerate records, in record order.
std::vector<double> defined_similarities(const std::vector<AgreementRecord>& records);

struct Histogram {
    std::vector<double> edges;  // bins + 1 entries; last bin is closed on the right
    std::vector<std::size_t> counts;

    std::size_t bins() const noexcept { return counts.size(); }
    /// Bin holding `value`; values outside [edges.front(), edges.back()] clamp to the ends.
    std::size_t bin_of(double value) const;
};

/// Equal-width bins over [min, max] of the values. When all values are equal
/// the result is a single bin of width epsilon holding everything.
Histogram make_histogram(std::span<const double> values, std::size_t bins);
/// Histogram of defined similarities; throws no_defined_similarities when there are none.
Histogram similarity_histogram(const std::vector<AgreementRecord>& records, std::size_t bins);

OrderedJson agreement_to_json(const AgreementRecord& r);
AgreementRecord agreement_from_json(const Json& record, const std::string& where);
std::vector<AgreementRecord> read_agreement_file(const std::filesystem::path& path);
void write_agreement_file(const std::filesystem::path& path, const std::vector<AgreementRecord>& records);

}  // namespace tokenaudit
