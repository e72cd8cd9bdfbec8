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

#include <tokenaudit/attribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include <tokenaudit/jsonl.hpp>

namespace tokenaudit {

AttributionScope AttributionScope::parse(std::string_view text) {
    if (text == "full") return full();
    constexpr std::string_view prefix = "partial:";
    if (text.substr(0, prefix.size()) == prefix && text.size() > prefix.size()) {
        return partial(std::string(text.substr(prefix.size())));
    }
    throw Error(ErrorCode::invalid_argument, "scope must be 'full' or 'partial:<segment>', got '" + std::string(text) + "'");
}

std::string AttributionScope::to_string() const {
    return mode == Mode::full ? std::string("full") : "partial:" + partial_segment;
}

OrderedJson attribution_to_json(const AttributionVector& v) {
    OrderedJson tokens = OrderedJson::array();
    for (const auto& t : v.tokens) tokens.push_back(OrderedJson{{"segment", t.segment}, {"pos", t.position}, {"text", t.text}});
    return OrderedJson{{"instance", v.instance},   {"backend", v.backend},
                       {"scope", v.scope.to_string()}, {"tokens", std::move(tokens)},
                       {"effects", v.effects},     {"full_logits", v.full_logits.logits},
                       {"predicted", v.predicted}, {"gold", v.gold},
                       {"correct", v.correct}};
}

AttributionVector attribution_from_json(const Json& r, const std::string& where) {
    try {
        AttributionVector v;
        v.instance = r.at("instance").get<std::string>();
        v.backend = r.at("backend").get<std::string>();
        v.scope = AttributionScope::parse(r.at("scope").get<std::string>());
        for (const auto& t : r.at("tokens")) {
            v.tokens.push_back({t.at("segment").get<std::string>(), t.at("pos").get<std::size_t>(),
                                t.at("text").get<std::string>()});
        }
        v.effects = r.at("effects").get<std::vector<double>>();
        v.full_logits.logits = r.at("full_logits").get<std::vector<double>>();
        v.predicted = r.at("predicted").get<std::size_t>();
        v.gold = r.at("gold").get<std::size_t>();
        v.correct = r.at("correct").get<bool>();
        if (v.effects.size() != v.tokens.size()) {
            throw Error(ErrorCode::schema_violation, where + ": effects and tokens differ in length");
        }
        if (!std::all_of(v.effects.begin(), v.effects.end(), [](double x) { return std::isfinite(x); })) {
            throw Error(ErrorCode::schema_violation, where + ": non-finite effect");
        }
        if (v.correct != (v.predicted == v.gold)) {
            throw Error(ErrorCode::schema_violation, where + ": 'correct' disagrees with predicted/gold");
        }
        return v;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::schema_violation, where + ": " + e.what());
    }
}

std::vector<AttributionVector> read_attribution_file(const std::filesystem::path& path) {
    std::vector<AttributionVector> out;
    read_jsonl(path, [&](std::size_t line, const Json& record) {
        out.push_back(attribution_from_json(record, path.string() + ":" + std::to_string(line)));
    });
    return out;
}

void write_attribution_file(const std::filesystem::path& path, const std::vector<AttributionVector>& vectors) {
    std::string text;
    for (const auto& v : vectors) {
        text += attribution_to_json(v).dump();
        text += '\n';
    }
    write_text_atomic(path, text);
}

void check_backend_compatible(const Backend& backend, const Manifest& manifest) {
    if (backend.labels() != manifest.labels) {
        throw Error(ErrorCode::label_mismatch, "backend '" + backend.id() + "' label order differs from the corpus");
    }
    for (const auto& seg : backend.consumed_segments()) {
        if (!manifest.segment_index(seg)) {
            throw Error(ErrorCode::schema_violation, "backend '" + backend.id() + "' reads unknown segment '" + seg + "'");
        }
    }
}

namespace {

void check_scope(const AttributionScope& scope, const Manifest& manifest) {
    if (scope.mode == AttributionScope::Mode::partial && !manifest.segment_index(scope.partial_segment)) {
        throw Error(ErrorCode::invalid_argument, "scope segment '" + scope.partial_segment + "' is not in the schema");
    }
}

// Segment texts the backend receives, with an optional single omission.
ScoreInput make_input(const Backend& backend, const Instance& instance, const Manifest& manifest,
                      const Tokenizer& tokenizer, const TokenizedInstance& tokens,
                      const std::optional<OmissionSpec>& omit) {
    ScoreInput input;
    input.key = ScoreKey{instance.id, omit};
    for (std::size_t s = 0; s < manifest.segments.size(); ++s) {
        const auto& name = manifest.segments[s];
        if (!consumes(backend, name)) continue;
        if (omit && omit->segment == name) {
            input.segments.push_back({name, join_without(tokenizer, tokens.segments[s], omit->position)});
        } else {
            input.segments.push_back({name, tokenizer.join(tokens.segments[s])});
        }
    }
    return input;
}

}  // namespace

double omission_effect(const Backend& backend, const Instance& instance, const Manifest& manifest,
                       std::string_view segment, std::size_t position) {
    check_backend_compatible(backend, manifest);
    const auto seg_index = manifest.segment_index(segment);
    if (!seg_index) throw Error(ErrorCode::invalid_argument, "unknown segment '" + std::string(segment) + "'");
    const Tokenizer& tokenizer = tokenizer_for(manifest.tokenizer);
    const auto tokens = tokenize(instance, tokenizer);
    if (position >= tokens.segments[*seg_index].size()) {
        throw Error(ErrorCode::position_out_of_range, "instance '" + instance.id + "' segment '" +
                                                          std::string(segment) + "' has " +
                                                          std::to_string(tokens.segments[*seg_index].size()) +
                                                          " tokens, position " + std::to_string(position));
    }
    if (!consumes(backend, segment)) return 0.0;
    const std::vector<ScoreInput> batch{
        make_input(backend, instance, manifest, tokenizer, tokens, std::nullopt),
        make_input(backend, instance, manifest, tokenizer, tokens, OmissionSpec{std::string(segment), position})};
    const auto scores = backend.score_batch(batch);
    return scores[0][instance.gold] - scores[1][instance.gold];
}

AttributionVector attribute_instance(const Backend& backend, const Instance& instance, const Manifest& manifest,
                                     const AttributionScope& scope) {
    check_backend_compatible(backend, manifest);
    check_scope(scope, manifest);
    const Tokenizer& tokenizer = tokenizer_for(manifest.tokenizer);
    const auto tokens = tokenize(instance, tokenizer);

    AttributionVector v;
    v.instance = instance.id;
    v.backend = backend.id();
    v.scope = scope;
    v.gold = instance.gold;

    std::vector<ScoreInput> batch;
    batch.push_back(make_input(backend, instance, manifest, tokenizer, tokens, std::nullopt));
    std::vector<std::size_t> scored_slot;  // token index -> batch index, or 0 when not scored
    for (std::size_t s = 0; s < manifest.segments.size(); ++s) {
        const auto& name = manifest.segments[s];
        if (!scope.includes(name)) continue;
        const bool read = consumes(backend, name);
        for (std::size_t p = 0; p < tokens.segments[s].size(); ++p) {
            v.tokens.push_back({name, p, tokens.segments[s][p]});
            if (read) {
                scored_slot.push_back(batch.size());
                batch.push_back(make_input(backend, instance, manifest, tokenizer, tokens, OmissionSpec{name, p}));
            } else {
                scored_slot.push_back(0);
            }
        }
    }

    const auto scores = backend.score_batch(batch);
    v.full_logits = scores[0];
    v.predicted = argmax_label(v.full_logits);
    v.correct = v.predicted == v.gold;
    const double full_gold = v.full_logits[v.gold];
    v.effects.reserve(v.tokens.size());
    for (std::size_t slot : scored_slot) {
        v.effects.push_back(slot == 0 ? 0.0 : full_gold - scores[slot][v.gold]);
    }
    return v;
}

AttributionReport attribute_corpus(const Backend& backend, const Corpus& corpus, const AttributionScope& scope,
                                   const AttributionOptions& options, const AttributionSink& sink) {
    check_backend_compatible(backend, corpus.manifest());
    check_scope(scope, corpus.manifest());

    AttributionReport report;
    const auto& instances = corpus.instances();
    const std::size_t chunk = std::max<std::size_t>(options.chunk_size, 1);
    const std::size_t workers =
        std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(backend.max_in_flight(), 1));

    struct Slot {
        std::optional<AttributionVector> vector;
        std::optional<AttributionFailure> failure;
        std::exception_ptr fatal;
    };

    for (std::size_t begin = 0; begin < instances.size(); begin += chunk) {
        const std::size_t end = std::min(instances.size(), begin + chunk);
        std::vector<Slot> slots(end - begin);
        std::atomic<std::size_t> next{begin};
        std::atomic<bool> abort{false};

        auto work = [&] {
            while (!abort.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= end) return;
                Slot& slot = slots[i - begin];
                try {
                    slot.vector = attribute_instance(backend, instances[i], corpus.manifest(), scope);
                } catch (const Error& e) {
                    slot.failure = AttributionFailure{instances[i].id, e.code(), e.what()};
                    if (options.fail_fast) {
                        slot.fatal = std::current_exception();
                        abort = true;
                    }
                } catch (...) {
                    slot.fatal = std::current_exception();
                    abort = true;
                }
            }
        };

        const std::size_t threads = std::min(workers, end - begin);
        if (threads <= 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(threads);
            for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
        }

        for (auto& slot : slots) {
            if (slot.fatal) std::rethrow_exception(slot.fatal);
        }
        for (auto& slot : slots) {
            if (slot.vector) {
                sink(*slot.vector);
                ++report.written;
            } else if (slot.failure) {
                report.failures.push_back(std::move(*slot.failure));
            }
        }
    }
    return report;
}

AttributionReport attribute_corpus(const Backend& backend, const Corpus& corpus, const AttributionScope& scope,
                                   const std::filesystem::path& out, const AttributionOptions& options,
                                   std::shared_ptr<ScoreCache> cache) {
    std::shared_ptr<const Backend> cached;
    if (cache) {
        // Non-owning view of the caller's backend; it outlives this call.
        cached = std::make_shared<CachedBackend>(
            std::move(cache), std::shared_ptr<const Backend>(std::shared_ptr<void>(), &backend), CacheMode::lazy);
    }
    const Backend& scorer = cached ? *cached : backend;
    auto tmp = out;
    tmp += ".partial";
    AttributionReport report;
    {
        JsonlWriter writer(tmp);
        report = attribute_corpus(scorer, corpus, scope, options,
                                  [&](const AttributionVector& v) { writer.write(attribution_to_json(v)); });
    }
    std::filesystem::rename(tmp, out);
    return report;
}

}  // namespace tokenaudit
