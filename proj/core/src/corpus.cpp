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

#include <tokenaudit/corpus.hpp>

#include <algorithm>
#include <set>

#include <tokenaudit/errors.hpp>
#include <tokenaudit/tokenizer.hpp>

namespace tokenaudit {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw Error(ErrorCode::schema_violation, "label set is empty");
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw Error(ErrorCode::schema_violation, "empty label name");
        if (!seen.insert(n).second) throw Error(ErrorCode::schema_violation, "duplicate label '" + n + "'");
    }
}

std::optional<std::size_t> LabelSet::index_of(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

const Segment* Instance::find_segment(std::string_view name) const {
    for (const auto& s : segments) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::optional<std::size_t> Manifest::segment_index(std::string_view name) const {
    const auto it = std::find(segments.begin(), segments.end(), name);
    if (it == segments.end()) return std::nullopt;
    return static_cast<std::size_t>(it - segments.begin());
}

namespace {

std::vector<std::string> string_list(const Json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
        throw Error(ErrorCode::schema_violation, where + ": field '" + key + "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : doc.at(key)) {
        if (!v.is_string()) throw Error(ErrorCode::schema_violation, where + ": '" + key + "' entries must be strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

Manifest manifest_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::schema_violation, "manifest must be an object");
    Manifest m;
    m.dataset = doc.value("dataset", std::string{});
    m.split = doc.value("split", std::string{});
    m.labels = LabelSet(string_list(doc, "labels", "manifest"));
    m.segments = string_list(doc, "segments", "manifest");
    if (m.segments.empty()) throw Error(ErrorCode::schema_violation, "manifest declares no segments");
    std::set<std::string_view> seen;
    for (const auto& s : m.segments) {
        if (s.empty() || !seen.insert(s).second) {
            throw Error(ErrorCode::schema_violation, "manifest segment names must be unique and non-empty");
        }
    }
    m.tokenizer = doc.value("tokenizer", std::string("whitespace"));
    tokenizer_for(m.tokenizer);  // rejects unknown ids up front
    return m;
}

Json manifest_to_json(const Manifest& m) {
    return Json{{"dataset", m.dataset},
                {"split", m.split},
                {"labels", m.labels.names()},
                {"segments", m.segments},
                {"tokenizer", m.tokenizer}};
}

Manifest load_manifest(const std::filesystem::path& path) {
    try {
        return manifest_from_json(read_json(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::schema_violation) {
            throw Error(ErrorCode::schema_violation, path.string() + ": " + e.what());
        }
        throw;
    }
}

Corpus::Corpus(Manifest manifest, std::vector<Instance> instances)
    : manifest_(std::move(manifest)), instances_(std::move(instances)) {
    if (manifest_.labels.empty()) throw Error(ErrorCode::schema_violation, "corpus has no label set");
    if (instances_.empty()) throw Error(ErrorCode::schema_violation, "corpus has no instances");
    by_id_.reserve(instances_.size());
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        const Instance& inst = instances_[i];
        const std::string where = "instance #" + std::to_string(i + 1) + " ('" + inst.id + "')";
        if (inst.id.empty()) throw Error(ErrorCode::schema_violation, where + ": empty id");
        if (inst.gold >= manifest_.labels.size()) throw Error(ErrorCode::unknown_label, where + ": gold index out of range");
        if (inst.segments.size() != manifest_.segments.size()) {
            throw Error(ErrorCode::schema_violation, where + ": segment count does not match schema");
        }
        for (std::size_t s = 0; s < inst.segments.size(); ++s) {
            if (inst.segments[s].name != manifest_.segments[s]) {
                throw Error(ErrorCode::schema_violation,
                            where + ": segment " + std::to_string(s) + " is '" + inst.segments[s].name +
                                "', schema expects '" + manifest_.segments[s] + "'");
            }
        }
        if (!by_id_.emplace(inst.id, i).second) throw Error(ErrorCode::duplicate_id, where + ": duplicate id");
    }
}

const Instance* Corpus::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &instances_[it->second];
}

Instance instance_from_json(const Json& record, const Manifest& manifest, const std::string& where) {
    if (!record.is_object()) throw Error(ErrorCode::schema_violation, where + ": record must be an object");
    for (const auto& [key, value] : record.items()) {
        if (key != "id" && key != "segments" && key != "label") {
            throw Error(ErrorCode::schema_violation, where + ": unexpected field '" + key + "'");
        }
    }
    Instance inst;
    if (!record.contains("id") || !record.at("id").is_string()) {
        throw Error(ErrorCode::schema_violation, where + ": field 'id' must be a string");
    }
    inst.id = record.at("id").get<std::string>();
    if (!record.contains("segments") || !record.at("segments").is_array()) {
        throw Error(ErrorCode::schema_violation, where + ": field 'segments' must be an array");
    }
    for (const auto& seg : record.at("segments")) {
        if (!seg.is_object() || !seg.contains("name") || !seg.contains("text") || !seg.at("name").is_string() ||
            !seg.at("text").is_string() || seg.size() != 2) {
            throw Error(ErrorCode::schema_violation, where + ": field 'segments' entries must be {name, text}");
        }
        inst.segments.push_back({seg.at("name").get<std::string>(), seg.at("text").get<std::string>()});
    }
    if (inst.segments.size() != manifest.segments.size()) {
        throw Error(ErrorCode::schema_violation, where + ": field 'segments' has " +
                                                     std::to_string(inst.segments.size()) + " entries, schema has " +
                                                     std::to_string(manifest.segments.size()));
    }
    for (std::size_t s = 0; s < inst.segments.size(); ++s) {
        if (inst.segments[s].name != manifest.segments[s]) {
            throw Error(ErrorCode::schema_violation, where + ": field 'segments' entry " + std::to_string(s) +
                                                         " named '" + inst.segments[s].name + "', expected '" +
                                                         manifest.segments[s] + "'");
        }
    }
    if (!record.contains("label") || !record.at("label").is_string()) {
        throw Error(ErrorCode::schema_violation, where + ": field 'label' must be a string");
    }
    const auto label = record.at("label").get<std::string>();
    const auto gold = manifest.labels.index_of(label);
    if (!gold) throw Error(ErrorCode::unknown_label, where + ": unknown label '" + label + "'");
    inst.gold = *gold;
    return inst;
}

OrderedJson instance_to_json(const Instance& instance, const LabelSet& labels) {
    OrderedJson segs = OrderedJson::array();
    for (const auto& s : instance.segments) segs.push_back(OrderedJson{{"name", s.name}, {"text", s.text}});
    return OrderedJson{{"id", instance.id}, {"segments", std::move(segs)}, {"label", labels.name(instance.gold)}};
}

Corpus load_corpus(const std::filesystem::path& path, const Manifest& manifest) {
    std::vector<Instance> instances;
    std::unordered_map<std::string, std::size_t> first_line;
    read_jsonl(path, [&](std::size_t line_no, const Json& record) {
        const std::string where = path.string() + ":" + std::to_string(line_no);
        Instance inst = instance_from_json(record, manifest, where);
        const auto [it, inserted] = first_line.emplace(inst.id, line_no);
        if (!inserted) {
            throw Error(ErrorCode::duplicate_id,
                        where + ": id '" + inst.id + "' already used on line " + std::to_string(it->second));
        }
        instances.push_back(std::move(inst));
    });
    if (instances.empty()) throw Error(ErrorCode::schema_violation, path.string() + ": corpus is empty");
    return Corpus(manifest, std::move(instances));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::string out;
    for (const auto& inst : corpus.instances()) {
        out += instance_to_json(inst, corpus.labels()).dump();
        out += '\n';
    }
    write_text_atomic(path, out);
}

}  // namespace tokenaudit
