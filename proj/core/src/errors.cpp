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

#include <tokenaudit/errors.hpp>

namespace tokenaudit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::io_error: return "io-error";
        case ErrorCode::missing_file: return "missing-file";
        case ErrorCode::schema_violation: return "schema-violation";
        case ErrorCode::unknown_label: return "unknown-label";
        case ErrorCode::duplicate_id: return "duplicate-id";
        case ErrorCode::unknown_tokenizer: return "unknown-tokenizer";
        case ErrorCode::label_mismatch: return "label-mismatch";
        case ErrorCode::backend_unreachable: return "backend-unreachable";
        case ErrorCode::cache_miss: return "cache-miss";
        case ErrorCode::cache_corrupt: return "cache-corrupt";
        case ErrorCode::cache_conflict: return "cache-conflict";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::position_out_of_range: return "position-out-of-range";
        case ErrorCode::length_mismatch: return "length-mismatch";
        case ErrorCode::zero_norm: return "zero-norm";
        case ErrorCode::alignment_failure: return "alignment-failure";
        case ErrorCode::coverage_mismatch: return "coverage-mismatch";
        case ErrorCode::no_defined_similarities: return "no-defined-similarities";
        case ErrorCode::empty_pool: return "empty-pool";
        case ErrorCode::single_class_input: return "single-class-input";
        case ErrorCode::no_overlap: return "no-overlap";
        case ErrorCode::input_mismatch: return "input-mismatch";
        case ErrorCode::empty_subset: return "empty-subset";
        case ErrorCode::missing_id: return "missing-id";
        case ErrorCode::not_assigned: return "not-assigned";
        case ErrorCode::already_judged: return "already-judged";
        case ErrorCode::unknown_task: return "unknown-task";
        case ErrorCode::port_in_use: return "port-in-use";
        case ErrorCode::corrupt_annotation_file: return "corrupt-annotation-file";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace tokenaudit
