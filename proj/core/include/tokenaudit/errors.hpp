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

#include <stdexcept>
#include <string>
#include <string_view>

namespace tokenaudit {

/// Machine-readable failure category carried by every Error.
enum class ErrorCode {
    invalid_argument,
    io_error,
    missing_file,
    schema_violation,
    unknown_label,
    duplicate_id,
    unknown_tokenizer,
    label_mismatch,
    backend_unreachable,
    cache_miss,
    cache_corrupt,
    cache_conflict,
    dimension_mismatch,
    position_out_of_range,
    length_mismatch,
    zero_norm,
    alignment_failure,
    coverage_mismatch,
    no_defined_similarities,
    empty_pool,
    single_class_input,
    no_overlap,
    input_mismatch,
    empty_subset,
    missing_id,
    not_assigned,
    already_judged,
    unknown_task,
    port_in_use,
    corrupt_annotation_file,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tokenaudit
