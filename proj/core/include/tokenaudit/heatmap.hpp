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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <tokenaudit/agreement.hpp>
#include <tokenaudit/attribution.hpp>
#include <tokenaudit/corpus.hpp>

namespace tokenaudit {

/// Signed intensities in [-1, 1]: each effect divided by the vector's largest
/// |effect|. A zero vector maps to zeros.
std::vector<double> normalized_intensities(std::span<const double> effects);

/// CSS background for one token, or "" for zero intensity.
/// Positive effects are red, negative blue; alpha is |intensity|.
std::string token_background(double intensity);

struct HeatmapPage {
    const AttributionVector* main = nullptr;
    const AttributionVector* biased = nullptr;
    const LabelSet* labels = nullptr;
    std::optional<double> similarity;
    DegenerateFlag degenerate = DegenerateFlag::none;
};

std::string render_heatmap_html(const HeatmapPage& page);

/// File name used for an instance page (ids are sanitised for the filesystem).
std::string heatmap_file_name(std::string_view instance_id);

/// Writes one page per id plus index.html into out_dir. Throws missing_id when
/// an id lacks either attribution. `records` (optional) supplies similarities.
std::vector<std::filesystem::path> render_heatmaps(const std::vector<std::string>& ids,
                                                   const std::vector<AttributionVector>& main,
                                                   const std::vector<AttributionVector>& biased,
                                                   const LabelSet& labels,
                                                   const std::vector<AgreementRecord>& records,
                                                   const std::filesystem::path& out_dir);

}  // namespace tokenaudit
