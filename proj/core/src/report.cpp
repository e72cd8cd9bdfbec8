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

#include <tokenaudit/report.hpp>

#include <cstdio>
#include <unordered_map>

namespace tokenaudit {

std::string format_count(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string format_percent(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", percent);
    return buf;
}

std::string format_count_percent(std::size_t count, std::size_t base) {
    const double pct = base ? 100.0 * static_cast<double>(count) / static_cast<double>(base) : 0.0;
    return format_count(count) + " (" + format_percent(pct) + ")";
}

std::string_view to_string(Subset s) noexcept {
    switch (s) {
        case Subset::total: return "total";
        case Subset::easy: return "easy";
        case Subset::different: return "different";
    }
    return "total";
}

Subset subset_from_string(std::string_view name) {
    for (auto s : {Subset::total, Subset::easy, Subset::different}) {
        if (to_string(s) == name) return s;
    }
    throw Error(ErrorCode::invalid_argument, "subset must be total, easy or different");
}

LabelDistribution label_distribution(Subset subset, const Corpus& corpus, const std::vector<AgreementRecord>& records,
                                     double threshold) {
    LabelDistribution d;
    d.subset = subset;
    d.counts.assign(corpus.labels().size(), 0);
    if (subset == Subset::total) {
        for (const auto& inst : corpus.instances()) ++d.counts[inst.gold];
    } else {
        for (const auto& r : records) {
            if (!r.easy) continue;
            if (subset == Subset::different && !(r.similarity && *r.similarity < threshold)) continue;
            if (r.gold >= d.counts.size()) throw Error(ErrorCode::input_mismatch, "record gold index out of range");
            ++d.counts[r.gold];
        }
    }
    for (auto c : d.counts) d.size += c;
    if (d.size) {
        for (auto c : d.counts) d.fractions.push_back(static_cast<double>(c) / static_cast<double>(d.size));
    }
    return d;
}

double AuditSummary::easy_percent() const {
    return corpus_size ? 100.0 * static_cast<double>(easy) / static_cast<double>(corpus_size) : 0.0;
}

double AuditSummary::different_percent() const {
    return easy ? 100.0 * static_cast<double>(different) / static_cast<double>(easy) : 0.0;
}

AuditSummary build_summary(std::string setting, const Corpus& corpus, const std::vector<AgreementRecord>& records,
                           const CalibrationResult& calibration) {
    for (const auto& r : records) {
        const Instance* inst = corpus.find(r.instance);
        if (!inst) throw Error(ErrorCode::input_mismatch, "record '" + r.instance + "' is not in the corpus");
        if (inst->gold != r.gold) throw Error(ErrorCode::input_mismatch, "record '" + r.instance + "' gold differs from corpus");
    }
    AuditSummary s;
    s.setting = std::move(setting);
    s.dataset = corpus.manifest().dataset;
    s.split = corpus.manifest().split;
    s.labels = corpus.labels().names();
    s.corpus_size = corpus.size();
    s.paired = records.size();
    s.threshold = calibration.threshold;
    s.f1_negative = calibration.f1_negative;
    if (calibration.similar && calibration.different) s.auc = calibration.auc;
    s.iaa = calibration.iaa;

    const Partition p = classify_different(records, calibration.threshold);
    s.easy = p.easy;
    s.different = p.different;
    s.scored = p.scored;
    for (auto f : {DegenerateFlag::zero_main, DegenerateFlag::zero_biased, DegenerateFlag::zero_both,
                   DegenerateFlag::empty_scope}) {
        s.degenerate[std::string(to_string(f))] = 0;
    }
    for (const auto& r : records) {
        if (r.easy && r.degenerate != DegenerateFlag::none) ++s.degenerate[std::string(to_string(r.degenerate))];
    }
    s.distributions = {label_distribution(Subset::total, corpus, records, s.threshold),
                       label_distribution(Subset::easy, corpus, records, s.threshold),
                       label_distribution(Subset::different, corpus, records, s.threshold)};
    return s;
}

OrderedJson summary_to_json(const AuditSummary& s) {
    OrderedJson dists = OrderedJson::object();
    for (const auto& d : s.distributions) {
        OrderedJson counts = OrderedJson::object();
        OrderedJson fractions = OrderedJson::object();
        for (std::size_t i = 0; i < s.labels.size(); ++i) {
            counts[s.labels[i]] = d.counts[i];
            fractions[s.labels[i]] = d.empty() ? OrderedJson(nullptr) : OrderedJson(d.fractions[i]);
        }
        dists[std::string(to_string(d.subset))] =
            OrderedJson{{"size", d.size}, {"empty", d.empty()}, {"counts", counts}, {"fractions", fractions}};
    }
    OrderedJson degenerate = OrderedJson::object();
    for (const auto& [k, v] : s.degenerate) degenerate[k] = v;
    return OrderedJson{
        {"setting", s.setting},
        {"dataset", s.dataset},
        {"split", s.split},
        {"percent_bases", OrderedJson{{"easy", "corpus"}, {"different", "easy"}}},
        {"corpus_size", s.corpus_size},
        {"paired", s.paired},
        {"easy", OrderedJson{{"count", s.easy}, {"percent", format_percent(s.easy_percent())},
                             {"cell", format_count_percent(s.easy, s.corpus_size)}}},
        {"different", OrderedJson{{"count", s.different}, {"percent", format_percent(s.different_percent())},
                                  {"cell", format_count_percent(s.different, s.easy)}}},
        {"scored", s.scored},
        {"threshold", s.threshold},
        {"f1_negative", s.f1_negative},
        {"f1_cell", format_percent(100.0 * s.f1_negative)},
        {"auc", s.auc ? OrderedJson(*s.auc) : OrderedJson(nullptr)},
        {"iaa", s.iaa ? OrderedJson(*s.iaa) : OrderedJson(nullptr)},
        {"degenerate", degenerate},
        {"label_distribution", dists}};
}

namespace {

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string summary_table(const std::vector<AuditSummary>& summaries) {
    const std::vector<std::string> header{"Setting", "Easy (% of total)", "F1", "Different (% of easy)"};
    std::vector<std::vector<std::string>> rows{header};
    for (const auto& s : summaries) {
        rows.push_back({s.setting, format_count_percent(s.easy, s.corpus_size), format_percent(100.0 * s.f1_negative),
                        format_count_percent(s.different, s.easy)});
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
    }
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            out += c + 1 < rows[i].size() ? pad(rows[i][c], widths[c] + 2) : rows[i][c];
        }
        out += '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : widths) total += w + 2;
            out += std::string(total - 2, '-') + '\n';
        }
    }
    return out;
}

std::string html_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string summary_html(const AuditSummary& s) {
    std::string h;
    h += "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Audit: " + html_escape(s.setting) +
         "</title>\n<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse;margin:1em 0}"
         "td,th{border:1px solid #bbb;padding:4px 10px;text-align:right}th{background:#eee}"
         "td:first-child,th:first-child{text-align:left}</style></head><body>\n";
    h += "<h1>" + html_escape(s.setting) + "</h1>\n";
    h += "<p>Dataset: " + html_escape(s.dataset) + " / " + html_escape(s.split) + ", " + format_count(s.corpus_size) +
         " instances, " + format_count(s.paired) + " paired.</p>\n";
    h += "<table><tr><th>Setting</th><th>Easy (% of total)</th><th>F1</th><th>Different (% of easy)</th></tr>\n";
    h += "<tr><td>" + html_escape(s.setting) + "</td><td>" + format_count_percent(s.easy, s.corpus_size) + "</td><td>" +
         format_percent(100.0 * s.f1_negative) + "</td><td>" + format_count_percent(s.different, s.easy) +
         "</td></tr></table>\n";
    char thr[64];
    std::snprintf(thr, sizeof thr, "%.6f", s.threshold);
    h += "<p>Threshold: " + std::string(thr);
    if (s.auc) h += ", AUC: " + format_percent(100.0 * *s.auc) + "%";
    if (s.iaa) h += ", IAA: " + format_percent(100.0 * *s.iaa) + "%";
    h += "</p>\n<h2>Degenerate easy instances</h2>\n<table><tr><th>Flag</th><th>Count</th></tr>\n";
    for (const auto& [flag, n] : s.degenerate) h += "<tr><td>" + flag + "</td><td>" + format_count(n) + "</td></tr>\n";
    h += "</table>\n<h2>Label distribution (%)</h2>\n<table><tr><th>Subset</th><th>Size</th>";
    for (const auto& l : s.labels) h += "<th>" + html_escape(l) + "</th>";
    h += "</tr>\n";
    for (const auto& d : s.distributions) {
        h += "<tr><td>" + std::string(to_string(d.subset)) + "</td><td>" + format_count(d.size) + "</td>";
        for (std::size_t i = 0; i < s.labels.size(); ++i) {
            h += "<td>" + (d.empty() ? std::string("-") : format_percent(100.0 * d.fractions[i])) + " (" +
                 format_count(d.counts[i]) + ")</td>";
        }
        h += "</tr>\n";
    }
    h += "</table>\n</body></html>\n";
    return h;
}

}  // namespace tokenaudit
