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

#include "support/fixtures.hpp"

#include <atomic>
#include <fstream>

#include <tokenaudit/backend_factory.hpp>
#include <tokenaudit/errors.hpp>
#include <tokenaudit/jsonl.hpp>

namespace tokenaudit::testing {

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
        auto candidate = base / ("tokenaudit-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        if (std::filesystem::create_directory(candidate)) {
            path_ = std::move(candidate);
            return;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

Manifest nli_manifest() {
    Manifest m;
    m.dataset = "nli";
    m.split = "validation";
    m.labels = LabelSet({"entailment", "neutral", "contradiction"});
    m.segments = {"premise", "hypothesis"};
    return m;
}

Instance nli_instance(std::string id, std::string premise, std::string hypothesis, std::size_t gold) {
    return Instance{std::move(id), {{"premise", std::move(premise)}, {"hypothesis", std::move(hypothesis)}}, gold};
}

std::shared_ptr<LexiconModel> keyed_lexicon(std::string id, const LabelSet& labels, const std::string& token,
                                            std::size_t label, double weight, std::vector<std::string> consumed) {
    auto model = std::make_shared<LexiconModel>(std::move(id), labels, std::move(consumed));
    model->set_weight(token, label, weight);
    return model;
}

RandomLexiconSetup random_lexicon_setup(std::uint64_t seed, std::size_t instances, std::size_t vocab,
                                        std::size_t classes, std::size_t min_tokens, std::size_t max_tokens) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> weight(-3.0, 3.0);
    std::uniform_int_distribution<std::size_t> length(min_tokens, max_tokens);
    std::uniform_int_distribution<std::size_t> token(0, vocab - 1);
    std::uniform_int_distribution<std::size_t> label(0, classes - 1);

    RandomLexiconSetup s;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
    s.manifest.dataset = "random";
    s.manifest.labels = LabelSet(names);
    s.manifest.segments = {"text"};
    s.model = std::make_shared<LexiconModel>("random-lexicon", s.manifest.labels);
    for (std::size_t c = 0; c < classes; ++c) s.model->set_bias(c, weight(rng));
    s.weights.assign(vocab, std::vector<double>(classes, 0.0));
    for (std::size_t t = 0; t < vocab; ++t) {
        for (std::size_t c = 0; c < classes; ++c) {
            s.weights[t][c] = weight(rng);
            s.model->set_weight("w" + std::to_string(t), c, s.weights[t][c]);
        }
    }
    for (std::size_t i = 0; i < instances; ++i) {
        std::string text;
        const std::size_t n = length(rng);
        for (std::size_t k = 0; k < n; ++k) {
            if (k) text += ' ';
            text += "w" + std::to_string(token(rng));
        }
        s.instances.push_back(Instance{"r" + std::to_string(i), {{"text", text}}, label(rng)});
    }
    return s;
}

std::filesystem::path data_dir() { return TOKENAUDIT_TEST_DATA; }

ToyAudit toy_audit() {
    const auto dir = data_dir();
    auto corpus = load_corpus(dir / "toy.jsonl", load_manifest(dir / "manifest.json"));
    const auto d_main = load_backend_descriptor(dir / "main.toml");
    const auto d_biased = load_backend_descriptor(dir / "biased.toml");
    auto main = LexiconModel::from_json(d_main.id, d_main.labels, read_json(d_main.weights), d_main.segments);
    auto biased = LexiconModel::from_json(d_biased.id, d_biased.labels, read_json(d_biased.weights), d_biased.segments);
    return ToyAudit{std::move(corpus), std::move(main), std::move(biased)};
}

}  // namespace tokenaudit::testing
