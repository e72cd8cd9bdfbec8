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

#include <tokenaudit/annotation.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace tokenaudit {

std::string_view to_string(Judgment j) noexcept { return j == Judgment::similar ? "similar" : "different"; }

Judgment judgment_from_string(std::string_view name) {
    if (name == "similar") return Judgment::similar;
    if (name == "different") return Judgment::different;
    throw Error(ErrorCode::schema_violation, "judgment must be 'similar' or 'different', got '" + std::string(name) + "'");
}

OrderedJson annotation_to_json(const AnnotationRecord& r) {
    OrderedJson j{{"instance", r.instance}, {"annotator", r.annotator}, {"judgment", std::string(to_string(r.judgment))}};
    if (!r.timestamp.empty()) j["timestamp"] = r.timestamp;
    return j;
}

AnnotationRecord annotation_from_json(const Json& j, const std::string& where) {
    try {
        AnnotationRecord r;
        r.instance = j.at("instance").get<std::string>();
        r.annotator = j.at("annotator").get<std::string>();
        r.judgment = judgment_from_string(j.at("judgment").get<std::string>());
        r.timestamp = j.value("timestamp", std::string{});
        if (r.instance.empty() || r.annotator.empty()) {
            throw Error(ErrorCode::schema_violation, where + ": empty instance or annotator");
        }
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::schema_violation, where + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::schema_violation && std::string(e.what()).find(where) == std::string::npos) {
            throw Error(ErrorCode::schema_violation, where + ": " + e.what());
        }
        throw;
    }
}

std::vector<AnnotationRecord> read_annotation_file(const std::filesystem::path& path) {
    std::vector<AnnotationRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    read_jsonl(path, [&](std::size_t line, const Json& j) {
        const std::string where = path.string() + ":" + std::to_string(line);
        auto r = annotation_from_json(j, where);
        if (!seen.emplace(r.instance, r.annotator).second) {
            throw Error(ErrorCode::duplicate_id, where + ": '" + r.annotator + "' judged '" + r.instance + "' twice");
        }
        out.push_back(std::move(r));
    });
    return out;
}

void write_annotation_file(const std::filesystem::path& path, const std::vector<AnnotationRecord>& records) {
    std::string text;
    for (const auto& r : records) {
        text += annotation_to_json(r).dump();
        text += '\n';
    }
    write_text_atomic(path, text);
}

OverlapAgreement overlap_agreement(const std::vector<AnnotationRecord>& annotations) {
    // instance -> judgments, ordered by instance id for determinism
    std::map<std::string, std::vector<Judgment>> by_instance;
    for (const auto& a : annotations) by_instance[a.instance].push_back(a.judgment);
    OverlapAgreement out;
    for (const auto& [id, js] : by_instance) {
        if (js.size() < 2) continue;
        ++out.shared;
        if (std::all_of(js.begin(), js.end(), [&](Judgment j) { return j == js.front(); })) ++out.agreed;
    }
    return out;
}

double iaa(const std::vector<AnnotationRecord>& annotations) {
    const auto o = overlap_agreement(annotations);
    if (o.shared == 0) throw Error(ErrorCode::no_overlap, "no instance was judged by two annotators");
    return o.accuracy();
}

LabelJoin join_labels(const std::vector<AgreementRecord>& records, const std::vector<AnnotationRecord>& annotations) {
    std::unordered_map<std::string, const AgreementRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.instance, &r);

    struct Tally {
        int similar = 0;
        int different = 0;
        Judgment first = Judgment::similar;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Tally> tallies;
    for (const auto& a : annotations) {
        auto [it, inserted] = tallies.try_emplace(a.instance);
        if (inserted) {
            it->second.first = a.judgment;
            order.push_back(a.instance);
        }
        (a.judgment == Judgment::similar ? it->second.similar : it->second.different) += 1;
    }

    LabelJoin out;
    for (const auto& id : order) {
        const auto rec = by_id.find(id);
        if (rec == by_id.end()) {
            ++out.unknown;
            continue;
        }
        if (!rec->second->similarity) {
            ++out.unscored;
            continue;
        }
        const Tally& t = tallies.at(id);
        const bool positive = t.similar != t.different ? t.similar > t.different : t.first == Judgment::similar;
        out.labeled.push_back({*rec->second->similarity, positive});
        out.instances.push_back(id);
    }
    return out;
}

}  // namespace tokenaudit
