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

#include <tokenaudit/calibration.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace tokenaudit {
namespace {

// Uniform draw in [0, n) that does not depend on the standard library's
// distribution implementation, so samples are stable across toolchains.
std::size_t uniform_below(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

// First k elements of v become a uniform random k-subset.
template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k && i + 1 < v.size(); ++i) {
        const std::size_t j = i + uniform_below(rng, v.size() - i);
        std::swap(v[i], v[j]);
    }
}

void require_both_classes(std::span<const LabeledSimilarity> labeled) {
    const auto pos = std::count_if(labeled.begin(), labeled.end(), [](const auto& l) { return l.positive; });
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labeled.size())) {
        throw Error(ErrorCode::single_class_input, "labels must include both 'similar' and 'different'");
    }
}

__extension__ using Wide = unsigned __int128;

// 2TP / (2TP + FP + FN) kept as a fraction so candidates compare exactly.
struct F1Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 0;

    bool better_than(const F1Fraction& o) const {
        // num/den > o.num/o.den with 0/0 treated as 0.
        const Wide lhs = static_cast<Wide>(num) * (o.den ? o.den : 1);
        const Wide rhs = static_cast<Wide>(o.num) * (den ? den : 1);
        return lhs > rhs;
    }
    double value() const { return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0; }
};

F1Fraction f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    return {2 * tp, 2 * tp + fp + fn};
}

}  // namespace

SamplePlan SamplePlan::with_quota(std::size_t quota, std::size_t bins) {
    SamplePlan p;
    p.bins = bins;
    p.quotas.assign(bins, quota);
    return p;
}

SamplePlan SamplePlan::with_total(std::size_t total, std::size_t bins) {
    SamplePlan p;
    p.bins = bins;
    p.quotas.assign(bins, bins ? total / bins : 0);
    for (std::size_t b = 0; bins && b < total % bins; ++b) ++p.quotas[b];
    return p;
}

void SamplePlan::validate() const {
    if (bins == 0) throw Error(ErrorCode::invalid_argument, "sample plan needs at least one bin");
    if (quotas.size() != bins) throw Error(ErrorCode::invalid_argument, "sample plan needs one quota per bin");
    if (overlap > 0 && annotators.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "overlap items need at least two annotators");
    }
    if (annotators.empty()) throw Error(ErrorCode::invalid_argument, "sample plan has no annotators");
    std::vector<std::string> sorted = annotators;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
        std::any_of(sorted.begin(), sorted.end(), [](const auto& a) { return a.empty(); })) {
        throw Error(ErrorCode::invalid_argument, "annotator ids must be unique and non-empty");
    }
}

SampleResult sample_for_annotation(const std::vector<AgreementRecord>& records, const SamplePlan& plan) {
    plan.validate();
    std::vector<const AgreementRecord*> pool;
    for (const auto& r : records) {
        if (r.similarity) pool.push_back(&r);
    }
    if (pool.empty()) throw Error(ErrorCode::empty_pool, "no easy, non-degenerate records to sample from");

    std::vector<double> sims;
    sims.reserve(pool.size());
    for (const auto* r : pool) sims.push_back(*r->similarity);

    SampleResult out;
    out.histogram = make_histogram(sims, plan.bins);
    const std::size_t bins = out.histogram.bins();
    std::vector<std::vector<std::size_t>> members(bins);
    for (std::size_t i = 0; i < pool.size(); ++i) members[out.histogram.bin_of(sims[i])].push_back(i);

    std::mt19937_64 rng(plan.seed);
    std::vector<std::vector<std::size_t>> chosen(bins);
    out.bin_sizes.resize(bins);
    out.per_bin.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        auto m = members[b];
        out.bin_sizes[b] = m.size();
        const std::size_t take = std::min(plan.quotas[b], m.size());
        partial_shuffle(m, take, rng);
        m.resize(take);
        std::sort(m.begin(), m.end());
        chosen[b] = std::move(m);
        out.per_bin[b] = take;
    }
    const std::size_t total = std::accumulate(out.per_bin.begin(), out.per_bin.end(), std::size_t{0});
    if (plan.overlap > total) {
        throw Error(ErrorCode::invalid_argument, "overlap of " + std::to_string(plan.overlap) + " exceeds the " +
                                                     std::to_string(total) + " sampled items");
    }

    // Largest-remainder apportionment of the overlap across bins.
    out.overlap_per_bin.assign(bins, 0);
    std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder, bin)
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t scaled = plan.overlap * out.per_bin[b];
        out.overlap_per_bin[b] = total ? scaled / total : 0;
        assigned += out.overlap_per_bin[b];
        remainders.emplace_back(total ? scaled % total : 0, b);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < plan.overlap; ++k) {
        const std::size_t b = remainders[k % bins].second;
        if (out.overlap_per_bin[b] < out.per_bin[b]) {
            ++out.overlap_per_bin[b];
            ++assigned;
        }
    }

    struct Draft {
        std::size_t pool_index;
        std::size_t bin;
        bool overlap;
    };
    std::vector<Draft> drafts;
    drafts.reserve(total);
    for (std::size_t b = 0; b < bins; ++b) {
        auto picks = chosen[b];
        partial_shuffle(picks, out.overlap_per_bin[b], rng);
        for (std::size_t k = 0; k < picks.size(); ++k) drafts.push_back({picks[k], b, k < out.overlap_per_bin[b]});
    }
    // Presentation order is shuffled so annotators do not walk the similarity scale.
    partial_shuffle(drafts, drafts.size(), rng);

    std::size_t deal = 0;
    out.tasks.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        const auto& d = drafts[i];
        char id[24];
        std::snprintf(id, sizeof id, "t%04zu", i + 1);
        AnnotationTaskSpec t;
        t.task = id;
        t.instance = pool[d.pool_index]->instance;
        t.bin = d.bin;
        t.similarity = sims[d.pool_index];
        t.overlap = d.overlap;
        if (d.overlap) {
            t.annotators = plan.annotators;
        } else {
            t.annotators = {plan.annotators[deal++ % plan.annotators.size()]};
        }
        out.tasks.push_back(std::move(t));
    }
    return out;
}

OrderedJson task_to_json(const AnnotationTaskSpec& t) {
    return OrderedJson{{"task", t.task},           {"instance", t.instance},   {"bin", t.bin},
                       {"similarity", t.similarity}, {"annotators", t.annotators}, {"overlap", t.overlap}};
}

AnnotationTaskSpec task_from_json(const Json& j, const std::string& where) {
    try {
        AnnotationTaskSpec t;
        t.task = j.at("task").get<std::string>();
        t.instance = j.at("instance").get<std::string>();
        t.bin = j.value("bin", std::size_t{0});
        t.similarity = j.value("similarity", 0.0);
        t.annotators = j.at("annotators").get<std::vector<std::string>>();
        t.overlap = j.value("overlap", t.annotators.size() > 1);
        if (t.task.empty() || t.instance.empty() || t.annotators.empty()) {
            throw Error(ErrorCode::schema_violation, where + ": task needs an id, an instance and annotators");
        }
        return t;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::schema_violation, where + ": " + e.what());
    }
}

std::vector<AnnotationTaskSpec> read_task_file(const std::filesystem::path& path) {
    std::vector<AnnotationTaskSpec> out;
    read_jsonl(path, [&](std::size_t line, const Json& j) {
        out.push_back(task_from_json(j, path.string() + ":" + std::to_string(line)));
    });
    return out;
}

void write_task_file(const std::filesystem::path& path, const std::vector<AnnotationTaskSpec>& tasks) {
    std::string text;
    for (const auto& t : tasks) {
        text += task_to_json(t).dump();
        text += '\n';
    }
    write_text_atomic(path, text);
}

double auc(std::span<const LabeledSimilarity> labeled) {
    require_both_classes(labeled);
    std::vector<LabeledSimilarity> sorted(labeled.begin(), labeled.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.similarity < b.similarity; });
    // Doubled credit: 2 per (pos > neg) pair, 1 per tie.
    std::uint64_t credit2 = 0;
    std::uint64_t negatives_below = 0;
    std::uint64_t positives = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < sorted.size() && sorted[j].similarity == sorted[i].similarity) {
            (sorted[j].positive ? pos : neg) += 1;
            ++j;
        }
        credit2 += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        positives += pos;
        i = j;
    }
    return static_cast<double>(credit2) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives_below));
}

double negative_f1(std::span<const LabeledSimilarity> labeled, double threshold) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& l : labeled) {
        const bool predicted_different = l.similarity < threshold;
        if (predicted_different && !l.positive) ++tp;
        if (predicted_different && l.positive) ++fp;
        if (!predicted_different && !l.positive) ++fn;
    }
    return f1_from_counts(tp, fp, fn).value();
}

CalibrationResult tune_threshold(std::span<const LabeledSimilarity> labeled) {
    require_both_classes(labeled);
    std::vector<LabeledSimilarity> sorted(labeled.begin(), labeled.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.similarity < b.similarity; });

    CalibrationResult result;
    for (const auto& l : sorted) (l.positive ? result.similar : result.different) += 1;

    // Sweep the distinct values; everything at or below value i is "different"
    // for a threshold between value i and value i+1.
    std::size_t neg_below = 0;
    std::size_t pos_below = 0;
    std::optional<F1Fraction> best;
    double best_threshold = sorted.front().similarity;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].similarity == sorted[i].similarity) {
            (sorted[j].positive ? pos_below : neg_below) += 1;
            ++j;
        }
        if (j == sorted.size()) break;
        const double lo = sorted[i].similarity;
        const double hi = sorted[j].similarity;
        double mid = lo + (hi - lo) / 2.0;
        if (!(mid > lo)) mid = hi;  // adjacent doubles: keep the partition exact
        const auto f1 = f1_from_counts(neg_below, pos_below, result.different - neg_below);
        if (!best || f1.better_than(*best)) {
            best = f1;
            best_threshold = mid;
        }
        i = j;
    }
    if (!best) {
        // One distinct value: no midpoints exist, so the threshold sits on it
        // and nothing is classified "different".
        best = f1_from_counts(0, 0, result.different);
    }
    result.threshold = best_threshold;
    result.f1_negative = best->value();
    result.auc = auc(labeled);
    return result;
}

CalibrationResult tune_threshold_with_holdout(std::span<const LabeledSimilarity> labeled, double holdout_fraction,
                                              std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "holdout fraction must lie in (0, 1)");
    }
    std::vector<LabeledSimilarity> shuffled(labeled.begin(), labeled.end());
    std::mt19937_64 rng(seed);
    partial_shuffle(shuffled, shuffled.size(), rng);
    const auto held = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(shuffled.size())));
    if (held == 0 || held >= shuffled.size()) throw Error(ErrorCode::invalid_argument, "holdout split leaves an empty side");
    const std::span<const LabeledSimilarity> test(shuffled.data(), held);
    const std::span<const LabeledSimilarity> train(shuffled.data() + held, shuffled.size() - held);
    CalibrationResult result = tune_threshold(train);
    HoldoutMetrics h;
    h.size = test.size();
    h.f1_negative = negative_f1(test, result.threshold);
    try {
        h.auc = auc(test);
    } catch (const Error&) {
        h.auc.reset();
    }
    result.holdout = h;
    return result;
}

Json calibration_to_json(const CalibrationResult& r) {
    Json j{{"threshold", r.threshold},
           {"f1_negative", r.f1_negative},
           {"auc", r.auc},
           {"iaa", r.iaa ? Json(*r.iaa) : Json(nullptr)},
           {"counts", Json{{"similar", r.similar}, {"different", r.different}}}};
    if (r.holdout) {
        j["holdout"] = Json{{"size", r.holdout->size},
                            {"f1_negative", r.holdout->f1_negative},
                            {"auc", r.holdout->auc ? Json(*r.holdout->auc) : Json(nullptr)}};
    }
    return j;
}

CalibrationResult calibration_from_json(const Json& j) {
    try {
        CalibrationResult r;
        r.threshold = j.at("threshold").get<double>();
        r.f1_negative = j.at("f1_negative").get<double>();
        r.auc = j.at("auc").get<double>();
        if (j.contains("iaa") && !j.at("iaa").is_null()) r.iaa = j.at("iaa").get<double>();
        if (j.contains("counts")) {
            r.similar = j.at("counts").value("similar", std::size_t{0});
            r.different = j.at("counts").value("different", std::size_t{0});
        }
        if (j.contains("holdout")) {
            const auto& h = j.at("holdout");
            HoldoutMetrics m;
            m.size = h.at("size").get<std::size_t>();
            m.f1_negative = h.at("f1_negative").get<double>();
            if (!h.at("auc").is_null()) m.auc = h.at("auc").get<double>();
            r.holdout = m;
        }
        for (double v : {r.f1_negative, r.auc}) {
            if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::schema_violation, "calibration metric outside [0, 1]");
        }
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("calibration file: ") + e.what());
    }
}

CalibrationResult read_calibration_file(const std::filesystem::path& path) {
    return calibration_from_json(read_json(path));
}

void write_calibration_file(const std::filesystem::path& path, const CalibrationResult& r) {
    write_text_atomic(path, calibration_to_json(r).dump(2) + "\n");
}

double Partition::different_percent() const {
    return easy ? 100.0 * static_cast<double>(different) / static_cast<double>(easy) : 0.0;
}

Partition classify_different(const std::vector<AgreementRecord>& records, double threshold) {
    if (!std::isfinite(threshold)) throw Error(ErrorCode::invalid_argument, "threshold must be finite");
    Partition p;
    p.threshold = threshold;
    for (const auto& r : records) {
        if (!r.easy) continue;
        ++p.easy;
        if (!r.similarity) {
            ++p.degenerate;
            continue;
        }
        ++p.scored;
        if (*r.similarity < threshold) {
            ++p.different;
            p.different_ids.push_back(r.instance);
        } else {
            ++p.similar;
        }
    }
    return p;
}

}  // namespace tokenaudit
