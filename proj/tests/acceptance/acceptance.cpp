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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and nowhere else. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <tokenaudit/agreement.hpp>
#include <tokenaudit/annotation.hpp>
#include <tokenaudit/attribution.hpp>
#include <tokenaudit/calibration.hpp>
#include <tokenaudit/report.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace ta = tokenaudit;

namespace {

constexpr double kEffectTolerance = 1e-9;
constexpr double kAttributionBudgetSeconds = 5.0;
constexpr double kSimilarityTolerance = 1e-9;
constexpr double kSelfAgreementMargin = 1e-6;
constexpr double kOrthogonalCeiling = 0.1;
constexpr double kOrthogonalShare = 0.95;
constexpr int kOracleSets = 200;
constexpr std::size_t kOracleMaxPoints = 1000;

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::vector<ta::AttributionVector> attribute_all(const ta::Backend& backend, const ta::Corpus& corpus,
                                                 const ta::AttributionScope& scope, std::size_t workers = 1) {
    std::vector<ta::AttributionVector> out;
    ta::AttributionOptions options;
    options.workers = workers;
    ta::attribute_corpus(backend, corpus, scope, options, [&](const ta::AttributionVector& v) { out.push_back(v); });
    return out;
}

// Two independent random lexicons over one random corpus; gold follows the
// first model so that a useful share of instances is easy.
struct TwoModels {
    ta::Corpus corpus;
    std::shared_ptr<ta::LexiconModel> main;
    std::shared_ptr<ta::LexiconModel> biased;
};

TwoModels two_random_models(std::uint64_t seed, std::size_t n) {
    auto a = ta::testing::random_lexicon_setup(seed, n, 50, 3, 3, 15);
    auto b = ta::testing::random_lexicon_setup(seed + 1000, 1, 50, 3, 3, 15);
    for (auto& inst : a.instances) {
        inst.gold = a.model->predict(ta::ScoreInput{inst.segments, std::nullopt});
    }
    return {ta::Corpus(a.manifest, std::move(a.instances)), a.model, b.model};
}

Outcome attribution_oracle() {
    const auto s = ta::testing::random_lexicon_setup(20240501, 1000, 50, 3, 3, 15);
    const ta::Corpus corpus(s.manifest, s.instances);
    const auto start = std::chrono::steady_clock::now();
    const auto vectors = attribute_all(*s.model, corpus, ta::AttributionScope::full());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double worst = 0.0;
    std::size_t effects = 0;
    for (const auto& v : vectors) {
        for (std::size_t k = 0; k < v.tokens.size(); ++k) {
            const auto token = std::stoul(v.tokens[k].text.substr(1));
            worst = std::max(worst, std::abs(v.effects[k] - s.weights[token][v.gold]));
            ++effects;
        }
    }
    return {vectors.size() == 1000 && worst <= kEffectTolerance && seconds < kAttributionBudgetSeconds,
            std::to_string(vectors.size()) + " instances, " + std::to_string(effects) + " effects, max |error| " +
                fmt("%.2e", worst) + ", " + fmt("%.2f", seconds) + " s"};
}

Outcome self_agreement() {
    const auto toy = ta::testing::toy_audit();
    const auto rnd = two_random_models(7, 500);
    const std::vector<std::pair<std::shared_ptr<const ta::Backend>, const ta::Corpus*>> cases{
        {toy.main, &toy.corpus}, {toy.biased, &toy.corpus}, {rnd.main, &rnd.corpus}, {rnd.biased, &rnd.corpus}};
    const std::vector<double> thresholds{-1.0, 0.0, 0.5, 0.9, 0.999, 1.0 - 1.0000001 * kSelfAgreementMargin};
    double worst = 0.0;
    std::size_t scored = 0;
    std::size_t different = 0;
    for (const auto& [backend, corpus] : cases) {
        for (const auto scope : {ta::AttributionScope::full(), ta::AttributionScope::partial(corpus->manifest().segments.back())}) {
            const auto v = attribute_all(*backend, *corpus, scope);
            const auto records = ta::pair_and_score(v, v, scope).records;
            for (const auto& r : records) {
                if (!r.similarity) continue;
                ++scored;
                worst = std::max(worst, std::abs(*r.similarity - 1.0));
            }
            for (double t : thresholds) different += ta::classify_different(records, t).different;
        }
    }
    return {scored > 0 && worst <= kSimilarityTolerance && different == 0,
            std::to_string(scored) + " scored pairs, max |sim - 1| " + fmt("%.2e", worst) + ", different " +
                std::to_string(different)};
}

Outcome orthogonal_cues() {
    // Each instance: one A cue and one B cue for its label, plus filler the
    // two models weight with small independent noise.
    const ta::LabelSet labels({"entailment", "neutral", "contradiction"});
    ta::Manifest manifest;
    manifest.dataset = "cues";
    manifest.labels = labels;
    manifest.segments = {"text"};
    auto main = std::make_shared<ta::LexiconModel>("cue-a", labels);
    auto biased = std::make_shared<ta::LexiconModel>("cue-b", labels);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    const std::size_t filler = 40;
    for (std::size_t w = 0; w < filler; ++w) {
        for (std::size_t c = 0; c < 3; ++c) {
            main->set_weight("f" + std::to_string(w), c, noise(rng));
            biased->set_weight("f" + std::to_string(w), c, noise(rng));
        }
    }
    for (std::size_t c = 0; c < 3; ++c) {
        main->set_weight("A" + std::to_string(c), c, 2.0);
        biased->set_weight("B" + std::to_string(c), c, 2.0);
    }
    std::uniform_int_distribution<std::size_t> label(0, 2), length(4, 12), word(0, filler - 1);
    std::bernoulli_distribution drop_one(0.1);
    std::vector<ta::Instance> instances;
    std::set<std::string> both_cues;
    for (std::size_t i = 0; i < 600; ++i) {
        const std::size_t gold = label(rng);
        std::vector<std::string> tokens;
        for (std::size_t k = length(rng); k > 0; --k) tokens.push_back("f" + std::to_string(word(rng)));
        const bool single = drop_one(rng);
        tokens.insert(tokens.begin() + static_cast<long>(tokens.size() / 3), "A" + std::to_string(gold));
        if (!single) tokens.insert(tokens.begin() + static_cast<long>(2 * tokens.size() / 3), "B" + std::to_string(gold));
        std::string text;
        for (const auto& t : tokens) text += (text.empty() ? "" : " ") + t;
        const std::string id = "q" + std::to_string(i);
        if (!single) both_cues.insert(id);
        instances.push_back(ta::Instance{id, {{"text", text}}, gold});
    }
    const ta::Corpus corpus(manifest, std::move(instances));
    const auto records = ta::pair_and_score(attribute_all(*main, corpus, ta::AttributionScope::full()),
                                            attribute_all(*biased, corpus, ta::AttributionScope::full()),
                                            ta::AttributionScope::full())
                             .records;
    std::size_t considered = 0, low = 0;
    for (const auto& r : records) {
        if (!r.easy || !both_cues.count(r.instance) || !r.similarity) continue;
        ++considered;
        low += *r.similarity <= kOrthogonalCeiling;
    }
    const double share = considered ? static_cast<double>(low) / static_cast<double>(considered) : 0.0;
    return {considered > 0 && share >= kOrthogonalShare,
            std::to_string(low) + " of " + std::to_string(considered) + " easy two-cue instances at or below " +
                fmt("%.2f", kOrthogonalCeiling) + " (" + fmt("%.1f", 100.0 * share) + "%)"};
}

Outcome scale_invariance() {
    const auto m = two_random_models(31, 800);
    const auto scope = ta::AttributionScope::full();
    const auto main_v = attribute_all(*m.main, m.corpus, scope);
    const auto base = ta::pair_and_score(main_v, attribute_all(*m.biased, m.corpus, scope), scope).records;
    double worst = 0.0;
    bool partitions_equal = true;
    std::size_t scored = 0;
    for (double c : {0.5, 3.0, 100.0}) {
        auto scaled_biased = std::make_shared<ta::ScaledBackend>(m.biased, c);
        ta::ScaledBackend scaled_main(m.main, c);
        const auto scaled = ta::pair_and_score(attribute_all(scaled_main, m.corpus, scope),
                                               attribute_all(*scaled_biased, m.corpus, scope), scope)
                                .records;
        const auto one_sided = ta::pair_and_score(main_v, attribute_all(*scaled_biased, m.corpus, scope), scope).records;
        for (const auto* variant : {&scaled, &one_sided}) {
            for (std::size_t i = 0; i < base.size(); ++i) {
                const auto& a = base[i];
                const auto& b = (*variant)[i];
                if (a.easy != b.easy || a.similarity.has_value() != b.similarity.has_value()) {
                    partitions_equal = false;
                    continue;
                }
                if (a.similarity) {
                    ++scored;
                    worst = std::max(worst, std::abs(*a.similarity - *b.similarity));
                }
            }
            for (int k = 0; k <= 40; ++k) {
                const double t = -1.0 + 0.05 * k;
                if (ta::classify_different(base, t).different_ids != ta::classify_different(*variant, t).different_ids) {
                    partitions_equal = false;
                }
            }
        }
    }
    return {scored > 0 && worst <= kSimilarityTolerance && partitions_equal,
            std::to_string(scored) + " similarity comparisons, max shift " + fmt("%.2e", worst) +
                (partitions_equal ? ", partitions identical at 41 thresholds" : ", partition changed")};
}

Outcome auc_oracle() {
    int mismatches = 0;
    std::size_t largest = 0;
    for (int k = 0; k < kOracleSets; ++k) {
        const auto data = ta::testing::random_labeled(5000 + k, kOracleMaxPoints, k % 2 == 0);
        largest = std::max(largest, data.size());
        if (ta::auc(data) != ta::testing::brute_force_auc(data).value()) ++mismatches;
    }
    return {mismatches == 0, std::to_string(kOracleSets) + " sets (largest " + std::to_string(largest) +
                                 " points), exact mismatches " + std::to_string(mismatches)};
}

Outcome threshold_oracle() {
    int mismatches = 0;
    for (int k = 0; k < kOracleSets; ++k) {
        const auto data = ta::testing::random_labeled(9000 + k, kOracleMaxPoints / 4, k % 2 == 0);
        const auto r = ta::tune_threshold(data);
        const auto o = ta::testing::exhaustive_threshold(data);
        if (r.threshold != o.threshold ||
            r.f1_negative != static_cast<double>(o.f1.num) / static_cast<double>(o.f1.den)) {
            ++mismatches;
        }
    }
    const std::vector<ta::LabeledSimilarity> worked{{0.1, false}, {0.2, false}, {0.8, true}, {0.9, true}};
    const auto w = ta::tune_threshold(worked);
    const bool example = w.threshold == 0.5 && w.f1_negative == 1.0;
    return {mismatches == 0 && example,
            std::to_string(kOracleSets) + " sets, mismatches " + std::to_string(mismatches) + "; worked example -> " +
                fmt("%.3f", w.threshold) + " / F1 " + fmt("%.3f", w.f1_negative)};
}

Outcome sampler_coverage() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ta::AgreementRecord> records;
    std::vector<double> sims;
    for (int i = 0; i < 3000; ++i) {
        // Mass piles up near 1 with a thin tail, so low bins are short.
        const double s = 1.0 - 2.0 * std::pow(u(rng), 6.0);
        sims.push_back(s);
        records.push_back({"s" + std::to_string(i), 0, true, true, true, s, ta::DegenerateFlag::none});
    }
    // Independent bin sizes: equal-width over the observed range, top bin closed.
    const double lo = *std::min_element(sims.begin(), sims.end());
    const double hi = *std::max_element(sims.begin(), sims.end());
    std::vector<std::size_t> sizes(20, 0);
    for (double s : sims) sizes[std::min<std::size_t>(19, static_cast<std::size_t>((s - lo) / ((hi - lo) / 20.0)))]++;

    bool ok = true;
    std::string detail;
    std::size_t short_bins = 0;
    for (std::size_t q : {1u, 5u, 13u, 60u}) {
        auto plan = ta::SamplePlan::with_quota(q, 20);
        plan.seed = 17;
        if (q == 1) plan.overlap = 10;  // 20 draws cannot hold the default 40
        const auto a = ta::sample_for_annotation(records, plan);
        const auto b = ta::sample_for_annotation(records, plan);
        std::vector<std::size_t> drawn(20, 0);
        std::size_t overlap = 0;
        for (const auto& t : a.tasks) {
            ++drawn[t.bin];
            if (t.overlap) ++overlap;
        }
        for (std::size_t bin = 0; bin < 20; ++bin) {
            if (drawn[bin] != std::min(q, sizes[bin])) ok = false;
            if (sizes[bin] > 0 && sizes[bin] < q) ++short_bins;
        }
        if (a.tasks != b.tasks) ok = false;
        if (overlap != plan.overlap) ok = false;
        detail += "q=" + std::to_string(q) + ": " + std::to_string(a.tasks.size()) + " tasks, overlap " +
                  std::to_string(overlap) + "; ";
    }
    return {ok && short_bins > 0, detail + std::to_string(short_bins) + " short bins exercised"};
}

// Runs attribute x2, compare, calibrate (hand-written annotations), classify
// and report into `dir`; returns the artifact file names.
std::vector<std::string> toy_pipeline(const std::filesystem::path& dir, std::size_t workers) {
    const auto toy = ta::testing::toy_audit();
    const auto scope = ta::AttributionScope::full();
    ta::AttributionOptions options;
    options.workers = workers;
    options.chunk_size = workers > 1 ? 4 : 64;
    ta::attribute_corpus(*toy.main, toy.corpus, scope, dir / "main.attr.jsonl", options);
    ta::attribute_corpus(*toy.biased, toy.corpus, scope, dir / "biased.attr.jsonl", options);
    const auto paired = ta::pair_and_score(dir / "main.attr.jsonl", dir / "biased.attr.jsonl", scope);
    ta::write_agreement_file(dir / "agreement.jsonl", paired.records);
    const auto annotations = ta::read_annotation_file(ta::testing::data_dir() / "annotations.jsonl");
    auto calibration = ta::tune_threshold(ta::join_labels(paired.records, annotations).labeled);
    calibration.iaa = ta::iaa(annotations);
    ta::write_calibration_file(dir / "calibration.json", calibration);
    const auto partition = ta::classify_different(paired.records, calibration.threshold);
    std::string ids;
    for (const auto& id : partition.different_ids) ids += id + "\n";
    ta::write_text_atomic(dir / "different.txt", ids);
    const auto summary = ta::build_summary("Toy-Full", toy.corpus, paired.records, calibration);
    ta::write_text_atomic(dir / "summary.json", ta::summary_to_json(summary).dump(2) + "\n");
    ta::write_text_atomic(dir / "summary.html", ta::summary_html(summary));
    ta::write_text_atomic(dir / "summary.txt", ta::summary_table({summary}));
    return {"main.attr.jsonl", "biased.attr.jsonl", "agreement.jsonl", "calibration.json",
            "different.txt",   "summary.json",      "summary.html",    "summary.txt"};
}

Outcome end_to_end_determinism() {
    ta::testing::TempDir tmp;
    const auto a = tmp / "serial-1";
    const auto b = tmp / "serial-2";
    const auto c = tmp / "concurrent";
    for (const auto& d : {a, b, c}) std::filesystem::create_directories(d);
    const auto files = toy_pipeline(a, 1);
    toy_pipeline(b, 1);
    toy_pipeline(c, 4);
    std::size_t differing = 0;
    for (const auto& f : files) {
        const auto ref = ta::read_text(a / f);
        if (ref != ta::read_text(b / f) || ref != ta::read_text(c / f)) ++differing;
    }

    // Printed percents recompute from printed counts.
    const auto j = ta::read_json(a / "summary.json");
    const auto pct = [](double num, double den) { return fmt("%.1f", den > 0 ? 100.0 * num / den : 0.0); };
    const double total = j["corpus_size"].get<double>();
    const double easy = j["easy"]["count"].get<double>();
    const double different = j["different"]["count"].get<double>();
    bool recompute = j["easy"]["percent"] == pct(easy, total) && j["different"]["percent"] == pct(different, easy);
    for (const auto& [name, dist] : j["label_distribution"].items()) {
        for (const auto& [label, count] : dist["counts"].items()) {
            if (dist["empty"].get<bool>()) continue;
            const double f = dist["fractions"][label].get<double>();
            recompute = recompute && fmt("%.1f", 100.0 * f) == pct(count.get<double>(), dist["size"].get<double>());
        }
    }
    // Hand count for the toy corpus: 28 easy of 30, 9 below the tuned threshold.
    const bool hand = total == 30 && easy == 28 && different == 9 && j["easy"]["cell"] == "28 (93.3)" &&
                      j["different"]["cell"] == "9 (32.1)";
    return {differing == 0 && recompute && hand,
            std::to_string(files.size()) + " artifacts x 3 runs, differing " + std::to_string(differing) +
                ", percents recompute " + (recompute ? "yes" : "no") + ", easy " +
                j["easy"]["cell"].get<std::string>() + ", different " + j["different"]["cell"].get<std::string>()};
}

Outcome report_format() {
    // 9,815 instances; 5,381 easy; 1,723 of those below the threshold.
    const auto m = ta::testing::nli_manifest();
    std::vector<ta::Instance> instances;
    std::vector<ta::AgreementRecord> records;
    for (std::size_t i = 0; i < 9815; ++i) {
        const std::string id = "v" + std::to_string(i);
        instances.push_back(ta::testing::nli_instance(id, "p", "h", i % 3));
        const bool easy = i < 5381;
        ta::AgreementRecord r{id, i % 3, true, easy, easy, std::nullopt, ta::DegenerateFlag::none};
        if (easy) r.similarity = i < 1723 ? 0.2 : 0.8;
        records.push_back(r);
    }
    const ta::Corpus corpus(m, std::move(instances));
    ta::CalibrationResult calibration;
    calibration.threshold = 0.5;
    calibration.f1_negative = 0.934;
    const auto table = ta::summary_table({ta::build_summary("MNLI-Partial", corpus, records, calibration)});
    const bool row = table.find("MNLI-Partial") != std::string::npos && table.find("5,381 (54.8)") != std::string::npos &&
                     table.find("93.4") != std::string::npos && table.find("1,723 (32.0)") != std::string::npos;
    const bool cells = ta::format_count_percent(6, 10) == "6 (60.0)" && ta::format_count_percent(3, 6) == "3 (50.0)" &&
                       ta::format_count_percent(0, 6) == "0 (0.0)" && ta::format_count_percent(392702, 392702) == "392,702 (100.0)";
    std::string last_line = table.substr(0, table.size() - 1);
    last_line = last_line.substr(last_line.rfind('\n') + 1);
    return {row && cells, "row \"" + last_line + "\""};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"attribution-oracle", attribution_oracle},
        {"self-agreement", self_agreement},
        {"orthogonal-cue-separation", orthogonal_cues},
        {"scale-invariance", scale_invariance},
        {"auc-oracle", auc_oracle},
        {"threshold-oracle", threshold_oracle},
        {"sampler-coverage", sampler_coverage},
        {"end-to-end-determinism", end_to_end_determinism},
        {"report-format-fidelity", report_format},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %-26s %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        failed += o.passed ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
