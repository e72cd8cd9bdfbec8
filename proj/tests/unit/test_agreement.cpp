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

#include <cmath>

#include <gtest/gtest.h>

#include <tokenaudit/agreement.hpp>

#include "support/expect_error.hpp"
#include "support/fixtures.hpp"

namespace ta = tokenaudit;
using ta::ErrorCode;

namespace {

ta::AttributionVector vec(std::string id, std::vector<double> effects, bool correct, std::size_t gold = 0) {
    ta::AttributionVector v;
    v.instance = std::move(id);
    v.backend = "m";
    for (std::size_t i = 0; i < effects.size(); ++i) v.tokens.push_back({"text", i, "t" + std::to_string(i)});
    v.effects = std::move(effects);
    v.full_logits = ta::ScoreVector{{1.0, 0.0}};
    v.gold = gold;
    v.predicted = correct ? gold : 1 - gold;
    v.correct = correct;
    return v;
}

}  // namespace

TEST(Cosine, HandValues) {
    const std::vector<double> a{1, 0}, b{0, 1}, c{2, 1}, d{1, 2};
    EXPECT_DOUBLE_EQ(ta::cosine(a, a), 1.0);
    EXPECT_DOUBLE_EQ(ta::cosine(a, b), 0.0);
    EXPECT_NEAR(ta::cosine(c, d), 0.8, 1e-15);
    const std::vector<double> neg{-2, -1};
    EXPECT_DOUBLE_EQ(ta::cosine(c, neg), -1.0);
}

TEST(Cosine, Errors) {
    const std::vector<double> a{1, 0}, three{1, 0, 0}, zero{0, 0};
    EXPECT_TA_ERROR(ta::cosine(a, three), ErrorCode::length_mismatch);
    EXPECT_TA_ERROR(ta::cosine(a, zero), ErrorCode::zero_norm);
}

TEST(Cosine, ClampedToUnitInterval) {
    const std::vector<double> a{0.1, 0.2, 0.3, 1e-17};
    const double c = ta::cosine(a, a);
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, 1.0 - 1e-15);
}

TEST(Cosine, ParallelIsExactlyOne) {
    const std::vector<double> a{0.1, 0.1, 0.1}, b{0.3, 0.3, 0.3}, c{-0.7, -0.7, -0.7};
    EXPECT_EQ(ta::cosine(a, b), 1.0);
    EXPECT_EQ(ta::cosine(b, c), -1.0);
    const std::vector<double> near{1.0, 1e-7};
    const std::vector<double> axis{1.0, 0.0};
    EXPECT_LT(ta::cosine(near, axis), 1.0);
}

TEST(PairAndScore, EasyAndNotEasy) {
    const auto r = ta::pair_and_score({vec("a", {2, 0}, true), vec("b", {1, 1}, true)},
                                      {vec("a", {2, 0}, true), vec("b", {1, 0}, false)}, ta::AttributionScope::full());
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_TRUE(r.records[0].easy);
    EXPECT_DOUBLE_EQ(*r.records[0].similarity, 1.0);
    EXPECT_FALSE(r.records[1].easy);
    EXPECT_FALSE(r.records[1].similarity);
    EXPECT_TRUE(r.full_coverage());
}

TEST(PairAndScore, DegenerateFlags) {
    const auto r = ta::pair_and_score({vec("zm", {0, 0}, true), vec("zb", {1, 0}, true), vec("zz", {0, 0}, true),
                                       vec("e", {}, true)},
                                      {vec("zm", {1, 0}, true), vec("zb", {0, 0}, true), vec("zz", {0, 0}, true),
                                       vec("e", {}, true)},
                                      ta::AttributionScope::full());
    EXPECT_EQ(r.records[0].degenerate, ta::DegenerateFlag::zero_main);
    EXPECT_EQ(r.records[1].degenerate, ta::DegenerateFlag::zero_biased);
    EXPECT_EQ(r.records[2].degenerate, ta::DegenerateFlag::zero_both);
    EXPECT_EQ(r.records[3].degenerate, ta::DegenerateFlag::empty_scope);
    EXPECT_TRUE(ta::defined_similarities(r.records).empty());
}

TEST(PairAndScore, ConstantLogitBackendIsZeroMain) {
    const auto m = ta::testing::nli_manifest();
    ta::LexiconModel constant("const", m.labels);
    constant.set_bias(0, 1.0);
    const auto biased = ta::testing::keyed_lexicon("b", m.labels, "yes", 0, 1.0);
    const auto inst = ta::testing::nli_instance("i", "a b", "yes c", 0);
    const auto r = ta::pair_and_score({ta::attribute_instance(constant, inst, m, ta::AttributionScope::full())},
                                      {ta::attribute_instance(*biased, inst, m, ta::AttributionScope::full())},
                                      ta::AttributionScope::full());
    EXPECT_TRUE(r.records[0].easy);
    EXPECT_EQ(r.records[0].degenerate, ta::DegenerateFlag::zero_main);
    EXPECT_FALSE(r.records[0].similarity);
}

TEST(PairAndScore, Errors) {
    auto shifted = vec("a", {1, 0}, true);
    shifted.tokens[1].text = "other";
    EXPECT_TA_ERROR(ta::pair_and_score({vec("a", {1, 0}, true)}, {shifted}, ta::AttributionScope::full()),
                    ErrorCode::alignment_failure);
    EXPECT_TA_ERROR(ta::pair_and_score({vec("a", {1}, true), vec("a", {1}, true)}, {vec("a", {1}, true)},
                                       ta::AttributionScope::full()),
                    ErrorCode::duplicate_id);
    EXPECT_TA_ERROR(ta::pair_and_score({vec("a", {1}, true, 0)}, {vec("a", {1}, true, 1)}, ta::AttributionScope::full()),
                    ErrorCode::input_mismatch);
    EXPECT_TA_ERROR(ta::pair_and_score({vec("a", {1}, true)}, {vec("a", {1}, true)},
                                       ta::AttributionScope::partial("text")),
                    ErrorCode::input_mismatch);
}

TEST(PairAndScore, CoverageReport) {
    const auto r = ta::pair_and_score({vec("a", {1}, true), vec("b", {1}, true)},
                                      {vec("b", {1}, true), vec("c", {1}, true)}, ta::AttributionScope::full());
    EXPECT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.only_main, (std::vector<std::string>{"a"}));
    EXPECT_EQ(r.only_biased, (std::vector<std::string>{"c"}));
    EXPECT_FALSE(r.full_coverage());
}

TEST(Histogram, HandBinning) {
    const std::vector<double> values{0.0, 0.5, 1.0};
    const auto h = ta::make_histogram(values, 2);
    EXPECT_EQ(h.edges, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 2}));
}

TEST(Histogram, AllEqualSingleBin) {
    const std::vector<double> values{0.3, 0.3, 0.3};
    const auto h = ta::make_histogram(values, 20);
    EXPECT_EQ(h.bins(), 1u);
    EXPECT_EQ(h.counts[0], 3u);
    EXPECT_GT(h.edges[1], h.edges[0]);
}

TEST(Histogram, ConservesCountsAndEdgesAreEqualWidth) {
    std::vector<double> values;
    for (int i = 0; i < 997; ++i) values.push_back(std::sin(i * 0.37));
    const auto h = ta::make_histogram(values, 20);
    std::size_t sum = 0;
    for (auto c : h.counts) sum += c;
    EXPECT_EQ(sum, values.size());
    const double width = h.edges[1] - h.edges[0];
    for (std::size_t b = 0; b < 20; ++b) EXPECT_NEAR(h.edges[b + 1] - h.edges[b], width, 1e-12);
    for (double v : values) {
        const auto b = h.bin_of(v);
        EXPECT_LE(h.edges[b], v);
        EXPECT_TRUE(v < h.edges[b + 1] || (b + 1 == h.bins() && v == h.edges[b + 1]));
    }
}

TEST(Histogram, NoValues) {
    EXPECT_TA_ERROR(ta::make_histogram(std::vector<double>{}, 3), ErrorCode::no_defined_similarities);
    EXPECT_TA_ERROR(ta::similarity_histogram({}, 3), ErrorCode::no_defined_similarities);
}

TEST(AgreementFile, RoundTripAndValidation) {
    ta::testing::TempDir dir;
    ta::AgreementRecord easy{"a", 1, true, true, true, 0.25, ta::DegenerateFlag::none};
    ta::AgreementRecord hard{"b", 0, true, false, false, std::nullopt, ta::DegenerateFlag::zero_biased};
    ta::write_agreement_file(dir / "g.jsonl", {easy, hard});
    EXPECT_EQ(ta::read_agreement_file(dir / "g.jsonl"), (std::vector<ta::AgreementRecord>{easy, hard}));

    auto j = ta::Json::parse(ta::agreement_to_json(hard).dump());
    j["similarity"] = 0.5;
    EXPECT_TA_ERROR(ta::agreement_from_json(j, "x"), ErrorCode::schema_violation);
    auto k = ta::Json::parse(ta::agreement_to_json(easy).dump());
    k["similarity"] = 1.5;
    EXPECT_TA_ERROR(ta::agreement_from_json(k, "x"), ErrorCode::schema_violation);
}
