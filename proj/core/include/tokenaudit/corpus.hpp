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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <tokenaudit/jsonl.hpp>

namespace tokenaudit {

/// Ordered class names. The order defines logit indexing for a whole run.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    bool empty() const noexcept { return names_.empty(); }
    const std::string& name(std::size_t index) const { return names_.at(index); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
};

struct Segment {
    std::string name;
    std::string text;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct Instance {
    std::string id;
    std::vector<Segment> segments;
    std::size_t gold = 0;

    const Segment* find_segment(std::string_view name) const;

    friend bool operator==(const Instance&, const Instance&) = default;
};

struct Manifest {
    std::string dataset;
    std::string split;
    LabelSet labels;
    std::vector<std::string> segments;  // schema every instance follows, in order
    std::string tokenizer = "whitespace";

    std::optional<std::size_t> segment_index(std::string_view name) const;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

Manifest manifest_from_json(const Json& doc);
Json manifest_to_json(const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);

/// Validated, immutable collection of instances sharing one segment schema.
class Corpus {
public:
    /// Throws schema_violation / duplicate_id / unknown_label on bad input.
    Corpus(Manifest manifest, std::vector<Instance> instances);

    const Manifest& manifest() const noexcept { return manifest_; }
    const LabelSet& labels() const noexcept { return manifest_.labels; }
    const std::vector<Instance>& instances() const noexcept { return instances_; }
    std::size_t size() const noexcept { return instances_.size(); }

    const Instance* find(std::string_view id) const;

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.manifest_ == b.manifest_ && a.instances_ == b.instances_;
    }

private:
    Manifest manifest_;
    std::vector<Instance> instances_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Parses one corpus record. `where` prefixes error messages (e.g. "c.jsonl:12").
Instance instance_from_json(const Json& record, const Manifest& manifest, const std::string& where);
OrderedJson instance_to_json(const Instance& instance, const LabelSet& labels);

Corpus load_corpus(const std::filesystem::path& path, const Manifest& manifest);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace tokenaudit
