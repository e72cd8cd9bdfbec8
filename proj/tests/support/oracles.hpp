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

#include <cstdint>
#include <span>
#include <vector>

#include <tokenaudit/annotation.hpp>

// Reference implementations written independently of the library: slow,
// obvious, and used only to cross-check the production code.
namespace tokenaudit::testing {

// Pairwise comparison over every (positive, negative) pair; ties score 1/2.
// Returns the numerator in half-units and the pair count so callers can
// compare exactly.
struct PairwiseAuc {
    std::uint64_t half_credit = 0;
    std::uint64_t pairs = 0;
    double value() const { return static_cast<double>(half_credit) / (2.0 * static_cast<double>(pairs)); }
};
PairwiseAuc brute_force_auc(std::span<const LabeledSimilarity> labeled);

// F1 of the negative ("different") class when everything below t is predicted
// negative, as an exact fraction num/den.
struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
};
Fraction negative_f1_fraction(std::span<const LabeledSimilarity> labeled, double t);

// Tries every midpoint between consecutive distinct similarities; keeps the
// first (smallest) candidate with the strictly best F1.
struct ExhaustiveThreshold {
    double threshold = 0.0;
    Fraction f1;
};
ExhaustiveThreshold exhaustive_threshold(std::span<const LabeledSimilarity> labeled);

std::vector<LabeledSimilarity> random_labeled(std::uint64_t seed, std::size_t max_points, bool coarse);

double naive_cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace tokenaudit::testing
