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

#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include <tokenaudit/calibration.hpp>

#include "support/expect_error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace ta = tokenaudit;
using ta::ErrorCode;
using ta::LabeledSimilarity;

namespace {

std::vector<ta::AgreementRecord> easy_records(const std::vector<double>& sims) {
    std::vector<ta::AgreementRecord> out;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        out.push_back({"e" + std::to_string(i), 0, true, true, true, sims[i], ta::DegenerateFlag::none});
    }
    return out;
}

std::vector<LabeledSimilarity> labeled(std::vector<double> pos, std::vector<double> neg) {
    std::vector<LabeledSimilarity> out;
    for (double p : pos) out.push_back({p, true});
    for (double n : neg) out.push_back({n, false});
    return out;
}

}  // namespace

TEST(Auc, HandValues) {
    EXPECT_DOUBLE_EQ(ta::auc(labeled({0.9, 0.8}, {0.1})), 1.0);
    EXPECT_DOUBLE_EQ(ta::auc(labeled({0.9, 0.2}, {0.5})), 0.5);
    EXPECT_DOUBLE_EQ(ta::auc(labeled({0.5}, {0.5})), 0.5);
    EXPECT_DOUBLE_EQ(ta::auc(labeled({0.1}, {0.9})), 0.0);
}

TEST(Auc, SingleClass) {
    EXPECT_TA_ERROR(ta::auc(labeled({0.1, 0.2}, {})), ErrorCode::single_class_input);
    EXPECT_TA_ERROR(ta::auc(labeled({}, {0.3})), ErrorCode::single_class_input);
}

TEST(TuneThreshold, WorkedExample) {
    const auto r = ta::tune_threshold(labeled({0.8, 0.9}, {0.1, 0.2}));
    EXPECT_DOUBLE_EQ(r.threshold, 0.5);
    EXPECT_DOUBLE_EQ(r.f1_negative, 1.0);
    EXPECT_DOUBLE_EQ(r.auc, 1.0);
    EXPECT_EQ(r.similar, 2u);
    EXPECT_EQ(r.different, 2u);
}

TEST(TuneThreshold, InterleavedMatchesExhaustive) {
    const auto data = labeled({0.2, 0.4, 0.6}, {0.1, 0.3, 0.5});
    const auto r = ta::tune_threshold(data);
    const auto oracle = ta::testing::exhaustive_threshold(data);
    EXPECT_LT(r.f1_negative, 1.0);
    EXPECT_EQ(r.threshold, oracle.threshold);
    EXPECT_DOUBLE_EQ(r.f1_negative, static_cast<double>(oracle.f1.num) / static_cast<double>(oracle.f1.den));
}

TEST(TuneThreshold, SingleClass) {
    EXPECT_TA_ERROR(ta::tune_threshold(labeled({0.1, 0.9}, {})), ErrorCode::single_class_input);
    EXPECT_TA_ERROR(ta::tune_threshold(labeled({}, {0.1, 0.9})), ErrorCode::single_class_input);
}

TEST(TuneThreshold, OneDistinctValue) {
    const auto r = ta::tune_threshold(labeled({0.4}, {0.4}));
    EXPECT_DOUBLE_EQ(r.threshold, 0.4);
    EXPECT_DOUBLE_EQ(r.f1_negative, 0.0);
}

TEST(TuneThreshold, Holdout) {
    std::vector<LabeledSimilarity> data;
    for (int i = 0; i < 100; ++i) data.push_back({i / 100.0, i >= 30});
    const auto r = ta::tune_threshold_with_holdout(data, 0.2, 7);
    ASSERT_TRUE(r.holdout);
    EXPECT_EQ(r.holdout->size, 20u);
    EXPECT_EQ(r.similar + r.different, 80u);
    EXPECT_DOUBLE_EQ(r.f1_negative, 1.0);
    EXPECT_DOUBLE_EQ(r.holdout->f1_negative, 1.0);
    EXPECT_TA_ERROR(ta::tune_threshold_with_holdout(data, 1.0, 7), ErrorCode::invalid_argument);
}

TEST(Classify, HandCounts) {
    const auto recs = easy_records({0.1, 0.4, 0.9});
    const auto p = ta::classify_different(recs, 0.5);
    EXPECT_EQ(p.easy, 3u);
    EXPECT_EQ(p.different, 2u);
    EXPECT_EQ(p.similar, 1u);
    EXPECT_NEAR(p.different_percent(), 66.7, 0.05);
    EXPECT_EQ(p.different_ids, (std::vector<std::string>{"e0", "e1"}));
    EXPECT_EQ(ta::classify_different(recs, 0.05).different, 0u);
    EXPECT_EQ(ta::classify_different(recs, 0.4).different, 1u);  // strictly below
}

TEST(Classify, DegenerateAndHardExcluded) {
    auto recs = easy_records({0.1});
    recs.push_back({"z", 0, true, true, true, std::nullopt, ta::DegenerateFlag::zero_both});
    recs.push_back({"h", 0, false, true, false, std::nullopt, ta::DegenerateFlag::none});
    const auto p = ta::classify_different(recs, 0.5);
    EXPECT_EQ(p.easy, 2u);
    EXPECT_EQ(p.scored, 1u);
    EXPECT_EQ(p.degenerate, 1u);
    EXPECT_EQ(p.different, 1u);
}

TEST(CalibrationFile, RoundTrip) {
    ta::testing::TempDir dir;
    auto r = ta::tune_threshold(labeled({0.8, 0.9}, {0.1, 0.2}));
    r.iaa = 0.9;
    ta::write_calibration_file(dir / "c.json", r);
    const auto back = ta::read_calibration_file(dir / "c.json");
    EXPECT_EQ(back.threshold, r.threshold);
    EXPECT_EQ(back.f1_negative, r.f1_negative);
    EXPECT_EQ(back.auc, r.auc);
    EXPECT_EQ(back.iaa, r.iaa);
    EXPECT_EQ(back.similar, 2u);
}

TEST(Sampler, TotalOverTwentyBins) {
    std::vector<double> sims;
    for (int i = 0; i < 2000; ++i) sims.push_back(std::clamp(std::sin(i * 1.7) * std::cos(i * 0.3), -1.0, 1.0));
    const auto recs = easy_records(sims);
    const auto plan = ta::SamplePlan::with_total(250, 20);
    const auto s = ta::sample_for_annotation(recs, plan);
    EXPECT_LE(s.tasks.size(), 250u);
    for (std::size_t b = 0; b < 20; ++b) {
        if (s.bin_sizes[b] > 0) EXPECT_GT(s.per_bin[b], 0u) << "bin " << b;
    }
    std::size_t overlap = 0;
    std::set<std::string> instances;
    for (const auto& t : s.tasks) {
        overlap += t.overlap;
        EXPECT_TRUE(instances.insert(t.instance).second);
        EXPECT_EQ(t.annotators.size(), t.overlap ? 2u : 1u);
        EXPECT_EQ(s.histogram.bin_of(t.similarity), t.bin);
    }
    EXPECT_EQ(overlap, 40u);
}

TEST(Sampler, ShortBinContributesNothing) {
    // Two clusters with an empty middle bin.
    const auto recs = easy_records({0.0, 0.05, 0.1, 0.9, 0.95, 1.0});
    auto plan = ta::SamplePlan::with_quota(1, 3);
    plan.overlap = 0;
    const auto s = ta::sample_for_annotation(recs, plan);
    EXPECT_EQ(s.per_bin, (std::vector<std::size_t>{1, 0, 1}));
    EXPECT_EQ(s.tasks.size(), 2u);
}

TEST(Sampler, SeedDeterminism) {
    std::vector<double> sims;
    for (int i = 0; i < 500; ++i) sims.push_back((i * 37 % 101) / 100.0);
    const auto recs = easy_records(sims);
    auto plan = ta::SamplePlan::with_quota(5, 20);
    plan.seed = 11;
    const auto a = ta::sample_for_annotation(recs, plan);
    const auto b = ta::sample_for_annotation(recs, plan);
    EXPECT_EQ(a.tasks, b.tasks);
    plan.seed = 12;
    EXPECT_NE(ta::sample_for_annotation(recs, plan).tasks, a.tasks);
}

TEST(Sampler, Errors) {
    EXPECT_TA_ERROR(ta::sample_for_annotation({}, ta::SamplePlan::with_quota(3)), ErrorCode::empty_pool);
    auto plan = ta::SamplePlan::with_quota(1, 2);
    plan.overlap = 5;
    EXPECT_TA_ERROR(ta::sample_for_annotation(easy_records({0.1, 0.9}), plan), ErrorCode::invalid_argument);
    plan.overlap = 1;
    plan.annotators = {"a1"};
    EXPECT_TA_ERROR(ta::sample_for_annotation(easy_records({0.1, 0.9}), plan), ErrorCode::invalid_argument);
}

TEST(TaskFile, RoundTrip) {
    ta::testing::TempDir dir;
    const auto s = ta::sample_for_annotation(easy_records({0.1, 0.2, 0.7, 0.9}), [] {
        auto p = ta::SamplePlan::with_quota(2, 2);
        p.overlap = 2;
        return p;
    }());
    ta::write_task_file(dir / "t.jsonl", s.tasks);
    EXPECT_EQ(ta::read_task_file(dir / "t.jsonl"), s.tasks);
}
