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

#include <tokenaudit/heatmap.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <tokenaudit/jsonl.hpp>
#include <tokenaudit/report.hpp>

namespace tokenaudit {

std::vector<double> normalized_intensities(std::span<const double> effects) {
    double peak = 0.0;
    for (double e : effects) peak = std::max(peak, std::abs(e));
    std::vector<double> out(effects.size(), 0.0);
    if (peak == 0.0) return out;
    for (std::size_t i = 0; i < effects.size(); ++i) out[i] = effects[i] / peak;
    return out;
}

std::string token_background(double intensity) {
    const double a = std::min(1.0, std::abs(intensity));
    char alpha[16];
    std::snprintf(alpha, sizeof alpha, "%.3f", a);
    if (std::string_view(alpha) == "0.000") return {};
    return std::string(intensity > 0 ? "rgba(214,39,40," : "rgba(31,119,180,") + alpha + ")";
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string render_pane(const std::string& title, const AttributionVector& v, const LabelSet& labels) {
    const auto intensity = normalized_intensities(v.effects);
    std::string h = "<div class=\"pane\"><h2>" + html_escape(title) + " <small>(" + html_escape(v.backend) +
                    ", predicted " + html_escape(labels.name(v.predicted)) + (v.correct ? ", correct" : ", wrong") +
                    ")</small></h2>\n";
    std::string current;
    for (std::size_t i = 0; i < v.tokens.size(); ++i) {
        const auto& t = v.tokens[i];
        if (t.segment != current) {
            if (!current.empty()) h += "</p>\n";
            current = t.segment;
            h += "<p><span class=\"seg\">" + html_escape(current) + ":</span> ";
        }
        const std::string bg = token_background(intensity[i]);
        h += "<span class=\"tok\"";
        if (!bg.empty()) h += " style=\"background-color:" + bg + "\"";
        h += " title=\"" + fixed(v.effects[i], 6) + "\">" + html_escape(t.text) + "</span> ";
    }
    if (!current.empty()) h += "</p>\n";
    if (v.tokens.empty()) h += "<p><em>no tokens in scope</em></p>\n";
    h += "</div>\n";
    return h;
}

const char* kStyle =
    "<style>body{font-family:sans-serif;margin:2em;max-width:60em}"
    ".tok{padding:1px 3px;border-radius:3px;line-height:1.9}.seg{color:#666;font-size:90%}"
    ".pane{border:1px solid #ccc;padding:0 1em;margin:1em 0}h2 small{font-weight:normal;color:#555}</style>";

}  // namespace

std::string render_heatmap_html(const HeatmapPage& page) {
    if (!page.main || !page.biased || !page.labels) throw Error(ErrorCode::invalid_argument, "incomplete heatmap page");
    const auto& m = *page.main;
    std::string h = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + html_escape(m.instance) +
                    "</title>" + kStyle + "</head><body>\n";
    h += "<h1>" + html_escape(m.instance) + "</h1>\n<p>Gold: <b>" + html_escape(page.labels->name(m.gold)) +
         "</b> &middot; scope: " + html_escape(m.scope.to_string()) + " &middot; similarity: ";
    if (page.similarity) {
        h += fixed(*page.similarity, 4);
    } else {
        h += "undefined";
        if (page.degenerate != DegenerateFlag::none) h += " (" + std::string(to_string(page.degenerate)) + ")";
    }
    h += "</p>\n";
    h += render_pane("Biased model", *page.biased, *page.labels);
    h += render_pane("Main model", m, *page.labels);
    h += "</body></html>\n";
    return h;
}

std::string heatmap_file_name(std::string_view id) {
    std::string out;
    for (unsigned char c : id) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
            out.push_back(static_cast<char>(c));
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "~%02X", c);
            out += buf;
        }
    }
    return out + ".html";
}

std::vector<std::filesystem::path> render_heatmaps(const std::vector<std::string>& ids,
                                                   const std::vector<AttributionVector>& main,
                                                   const std::vector<AttributionVector>& biased,
                                                   const LabelSet& labels,
                                                   const std::vector<AgreementRecord>& records,
                                                   const std::filesystem::path& out_dir) {
    std::unordered_map<std::string, const AttributionVector*> main_by_id, biased_by_id;
    for (const auto& v : main) main_by_id.emplace(v.instance, &v);
    for (const auto& v : biased) biased_by_id.emplace(v.instance, &v);
    std::unordered_map<std::string, const AgreementRecord*> rec_by_id;
    for (const auto& r : records) rec_by_id.emplace(r.instance, &r);

    for (const auto& id : ids) {
        if (!main_by_id.count(id) || !biased_by_id.count(id)) {
            throw Error(ErrorCode::missing_id, "no attribution pair for instance '" + id + "'");
        }
    }

    std::vector<std::filesystem::path> written;
    std::string index = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Token heatmaps</title>" +
                        std::string(kStyle) + "</head><body>\n<h1>Token heatmaps</h1>\n<ul>\n";
    for (const auto& id : ids) {
        HeatmapPage page;
        page.main = main_by_id.at(id);
        page.biased = biased_by_id.at(id);
        page.labels = &labels;
        if (page.main->tokens != page.biased->tokens) {
            throw Error(ErrorCode::alignment_failure, "token lists differ for instance '" + id + "'");
        }
        if (const auto it = rec_by_id.find(id); it != rec_by_id.end()) {
            page.similarity = it->second->similarity;
            page.degenerate = it->second->degenerate;
        }
        const auto path = out_dir / heatmap_file_name(id);
        write_text_atomic(path, render_heatmap_html(page));
        written.push_back(path);
        index += "<li><a href=\"" + html_escape(heatmap_file_name(id)) + "\">" + html_escape(id) + "</a>";
        if (page.similarity) index += " (" + fixed(*page.similarity, 4) + ")";
        index += "</li>\n";
    }
    index += "</ul>\n</body></html>\n";
    write_text_atomic(out_dir / "index.html", index);
    return written;
}

}  // namespace tokenaudit
