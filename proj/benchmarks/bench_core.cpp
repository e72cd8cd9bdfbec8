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

#include <benchmark/benchmark.h>

#include <tokenaudit/agreement.hpp>
#include <tokenaudit/attribution.hpp>
#include <tokenaudit/calibration.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace ta = tokenaudit;

static void BM_AttributeCorpus(benchmark::State& state) {
    const auto s = ta::testing::random_lexicon_setup(1, 1000, 50, 3, 3, 15);
    const ta::Corpus corpus(s.manifest, s.instances);
    ta::AttributionOptions options;
    options.workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        std::size_t n = 0;
        ta::attribute_corpus(*s.model, corpus, ta::AttributionScope::full(), options, [&](const auto&) { ++n; });
        benchmark::DoNotOptimize(n);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_AttributeCorpus)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_PairAndScore(benchmark::State& state) {
    const auto s = ta::testing::random_lexicon_setup(2, 2000, 50, 3, 3, 15);
    const ta::Corpus corpus(s.manifest, s.instances);
    std::vector<ta::AttributionVector> v;
    ta::attribute_corpus(*s.model, corpus, ta::AttributionScope::full(), {}, [&](const auto& x) { v.push_back(x); });
    for (auto _ : state) benchmark::DoNotOptimize(ta::pair_and_score(v, v, ta::AttributionScope::full()));
}
BENCHMARK(BM_PairAndScore)->Unit(benchmark::kMillisecond);

static void BM_Auc(benchmark::State& state) {
    const auto data = ta::testing::random_labeled(3, static_cast<std::size_t>(state.range(0)), false);
    for (auto _ : state) benchmark::DoNotOptimize(ta::auc(data));
    state.SetComplexityN(static_cast<long>(data.size()));
}
BENCHMARK(BM_Auc)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

static void BM_AucPairwise(benchmark::State& state) {
    const auto data = ta::testing::random_labeled(3, static_cast<std::size_t>(state.range(0)), false);
    for (auto _ : state) benchmark::DoNotOptimize(ta::testing::brute_force_auc(data));
    state.SetComplexityN(static_cast<long>(data.size()));
}
BENCHMARK(BM_AucPairwise)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oNSquared);

static void BM_TuneThreshold(benchmark::State& state) {
    const auto data = ta::testing::random_labeled(4, static_cast<std::size_t>(state.range(0)), false);
    for (auto _ : state) benchmark::DoNotOptimize(ta::tune_threshold(data));
}
BENCHMARK(BM_TuneThreshold)->Range(256, 65536);

static void BM_Sample(benchmark::State& state) {
    std::vector<ta::AgreementRecord> records;
    for (int i = 0; i < 50000; ++i) {
        records.push_back({"r" + std::to_string(i), 0, true, true, true, ((i * 7919) % 50000) / 25000.0 - 1.0,
                           ta::DegenerateFlag::none});
    }
    auto plan = ta::SamplePlan::with_total(250, 20);
    for (auto _ : state) {
        plan.seed++;
        benchmark::DoNotOptimize(ta::sample_for_annotation(records, plan));
    }
}
BENCHMARK(BM_Sample)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
