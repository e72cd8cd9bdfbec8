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

#include <tokenaudit/agreement.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace tokenaudit {

std::string_view to_string(DegenerateFlag flag) noexcept {
    switch (flag) {
        case DegenerateFlag::none: return "none";
        case DegenerateFlag::zero_main: return "zero-main";
        case DegenerateFlag::zero_biased: return "zero-biased";
        case DegenerateFlag::zero_both: return "zero-both";
        case DegenerateFlag::empty_scope: return "empty-scope";
    }
    return "none";
}

DegenerateFlag degenerate_flag_from_string(std::string_view name) {
    for (auto f : {DegenerateFlag::none, DegenerateFlag::zero_main, DegenerateFlag::zero_biased,
                   DegenerateFlag::zero_both, DegenerateFlag::empty_scope}) {
        if (to_string(f) == name) return f;
    }
    throw Error(ErrorCode::schema_violation, "unknown degenerate flag '" + std::string(name) + "'");
}

namespace {

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.empty()) {
        throw Error(ErrorCode::length_mismatch,
                    "cosine of vectors sized " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw Error(ErrorCode::zero_norm, "cosine of a zero vector");
    const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
    // Parallel vectors land within rounding error of +-1; report them exactly
    // so that rescaling either vector cannot move them across a threshold.
    const double band = 4.0 * static_cast<double>(u.size() + 2) * std::numeric_limits<double>::epsilon();
    if (std::abs(c) >= 1.0 - band) return c > 0 ? 1.0 : -1.0;
    return c;
}

PairingResult pair_and_score(const std::vector<AttributionVector>& main, const std::vector<AttributionVector>& biased,
                             const AttributionScope& scope) {
    std::unordered_map<std::string, const AttributionVector*> by_id;
    by_id.reserve(biased.size());
    for (const auto& b : biased) {
        if (!by_id.emplace(b.instance, &b).second) {
            throw Error(ErrorCode::duplicate_id, "biased attributions repeat instance '" + b.instance + "'");
        }
    }

    PairingResult result;
    std::unordered_map<std::string, bool> seen_main;
    seen_main.reserve(main.size());
    for (const auto& m : main) {
        if (!seen_main.emplace(m.instance, true).second) {
            throw Error(ErrorCode::duplicate_id, "main attributions repeat instance '" + m.instance + "'");
        }
        if (m.scope != scope) {
            throw Error(ErrorCode::input_mismatch, "main attribution for '" + m.instance + "' has scope " +
                                                       m.scope.to_string() + ", expected " + scope.to_string());
        }
        const auto it = by_id.find(m.instance);
        if (it == by_id.end()) {
            result.only_main.push_back(m.instance);
            continue;
        }
        const AttributionVector& b = *it->second;
        if (b.scope != scope) {
            throw Error(ErrorCode::input_mismatch, "biased attribution for '" + b.instance + "' has scope " +
                                                       b.scope.to_string() + ", expected " + scope.to_string());
        }
        if (m.tokens != b.tokens) {
            throw Error(ErrorCode::alignment_failure, "token lists differ for instance '" + m.instance + "'");
        }
        if (m.gold != b.gold) throw Error(ErrorCode::input_mismatch, "gold labels differ for '" + m.instance + "'");

        AgreementRecord r;
        r.instance = m.instance;
        r.gold = m.gold;
        r.main_correct = m.correct;
        r.biased_correct = b.correct;
        r.easy = m.correct && b.correct;
        if (m.tokens.empty()) {
            r.degenerate = DegenerateFlag::empty_scope;
        } else {
            const bool zm = all_zero(m.effects);
            const bool zb = all_zero(b.effects);
            r.degenerate = zm && zb ? DegenerateFlag::zero_both
                           : zm     ? DegenerateFlag::zero_main
                           : zb     ? DegenerateFlag::zero_biased
                                    : DegenerateFlag::none;
        }
        if (r.easy && r.degenerate == DegenerateFlag::none) r.similarity = cosine(m.effects, b.effects);
        result.records.push_back(std::move(r));
    }
    for (const auto& b : biased) {
        if (!seen_main.count(b.instance)) result.only_biased.push_back(b.instance);
    }
    return result;
}

PairingResult pair_and_score(const std::filesystem::path& main, const std::filesystem::path& biased,
                             const AttributionScope& scope) {
    return pair_and_score(read_attribution_file(main), read_attribution_file(biased), scope);
}

std::vector<double> defined_similarities(const std::vector<AgreementRecord>& records) {
    std::vector<double> out;
    for (const auto& r : records) {
        if (r.similarity) out.push_back(*r.similarity);
    }
    return out;
}

std::size_t Histogram::bin_of(double value) const {
    // Interior edges only: bin i covers [edges[i], edges[i+1]).
    const auto first = edges.begin() + 1;
    const auto last = edges.end() - 1;
    return static_cast<std::size_t>(std::upper_bound(first, last, value) - first);
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw Error(ErrorCode::no_defined_similarities, "histogram of no values");
    if (bins == 0) throw Error(ErrorCode::invalid_argument, "histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    Histogram h;
    if (!(hi > lo)) {
        h.edges = {lo, lo + std::numeric_limits<double>::epsilon()};
        h.counts = {values.size()};
        return h;
    }
    const double width = std::max((hi - lo) / static_cast<double>(bins), std::numeric_limits<double>::epsilon());
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i < bins; ++i) h.edges[i] = lo + static_cast<double>(i) * width;
    h.edges[bins] = hi;
    h.counts.assign(bins, 0);
    for (double v : values) ++h.counts[h.bin_of(v)];
    return h;
}

Histogram similarity_histogram(const std::vector<AgreementRecord>& records, std::size_t bins) {
    const auto values = defined_similarities(records);
    if (values.empty()) throw Error(ErrorCode::no_defined_similarities, "no easy, non-degenerate records");
    return make_histogram(values, bins);
}

OrderedJson agreement_to_json(const AgreementRecord& r) {
    return OrderedJson{{"instance", r.instance},
                       {"gold", r.gold},
                       {"main_correct", r.main_correct},
                       {"biased_correct", r.biased_correct},
                       {"easy", r.easy},
                       {"similarity", r.similarity ? OrderedJson(*r.similarity) : OrderedJson(nullptr)},
                       {"degenerate", std::string(to_string(r.degenerate))}};
}

AgreementRecord agreement_from_json(const Json& j, const std::string& where) {
    try {
        AgreementRecord r;
        r.instance = j.at("instance").get<std::string>();
        r.gold = j.at("gold").get<std::size_t>();
        r.main_correct = j.value("main_correct", false);
        r.biased_correct = j.value("biased_correct", false);
        r.easy = j.at("easy").get<bool>();
        if (!j.at("similarity").is_null()) r.similarity = j.at("similarity").get<double>();
        r.degenerate = degenerate_flag_from_string(j.value("degenerate", std::string("none")));
        if (r.similarity && (!r.easy || r.degenerate != DegenerateFlag::none)) {
            throw Error(ErrorCode::schema_violation, where + ": similarity set on a non-easy or degenerate record");
        }
        if (r.similarity && !(*r.similarity >= -1.0 && *r.similarity <= 1.0)) {
            throw Error(ErrorCode::schema_violation, where + ": similarity outside [-1, 1]");
        }
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::schema_violation, where + ": " + e.what());
    }
}

std::vector<AgreementRecord> read_agreement_file(const std::filesystem::path& path) {
    std::vector<AgreementRecord> out;
    read_jsonl(path, [&](std::size_t line, const Json& j) {
        out.push_back(agreement_from_json(j, path.string() + ":" + std::to_string(line)));
    });
    return out;
}

void write_agreement_file(const std::filesystem::path& path, const std::vector<AgreementRecord>& records) {
    std::string text;
    for (const auto& r : records) {
        text += agreement_to_json(r).dump();
        text += '\n';
    }
    write_text_atomic(path, text);
}

}  // namespace tokenaudit
