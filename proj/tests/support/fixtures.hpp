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

#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <tokenaudit/corpus.hpp>
#include <tokenaudit/linear_models.hpp>

namespace tokenaudit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);

// entailment / neutral / contradiction over premise + hypothesis.
Manifest nli_manifest();
Instance nli_instance(std::string id, std::string premise, std::string hypothesis, std::size_t gold);

// Lexicon model with one weight set: w_label(token) = weight.
std::shared_ptr<LexiconModel> keyed_lexicon(std::string id, const LabelSet& labels, const std::string& token,
                                            std::size_t label, double weight,
                                            std::vector<std::string> consumed = {});

// Random single-segment corpus and a dense random lexicon over "w0".."w{vocab-1}".
struct RandomLexiconSetup {
    Manifest manifest;
    std::shared_ptr<LexiconModel> model;
    std::vector<Instance> instances;
    std::vector<std::vector<double>> weights;  // [token][label]
};
RandomLexiconSetup random_lexicon_setup(std::uint64_t seed, std::size_t instances, std::size_t vocab,
                                        std::size_t classes, std::size_t min_tokens, std::size_t max_tokens);

// The 30-instance toy audit in tests/data, shared with the CLI pipeline test.
// Per label: 4 instances where both models read the same hypothesis cue
// (similarity 1), 3 where each reads its own cue (similarity 0), 2 where the
// main model also reads a premise cue (similarity 2/sqrt(5)) and one without
// any cue.
struct ToyAudit {
    Corpus corpus;
    std::shared_ptr<LexiconModel> main;
    std::shared_ptr<LexiconModel> biased;
};
std::filesystem::path data_dir();
ToyAudit toy_audit();

}  // namespace tokenaudit::testing
