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

// tokenaudit: command-line front end for the attribution-agreement audit.
//
// Every subcommand is an independent step that reads and writes files, so a
// pipeline is a shell script:
//
//   tokenaudit attribute --corpus c.jsonl --manifest m.json --backend main.toml --scope full --out m.attr.jsonl
//   tokenaudit attribute --corpus c.jsonl --manifest m.json --backend biased.toml --scope full --out b.attr.jsonl
//   tokenaudit compare --main m.attr.jsonl --biased b.attr.jsonl --scope full --out agree.jsonl
//   tokenaudit sample --agreement agree.jsonl --total 250 --out tasks.jsonl
//   tokenaudit calibrate --agreement agree.jsonl --annotations ann.jsonl --out calib.json
//   tokenaudit report --corpus c.jsonl --manifest m.json --agreement agree.jsonl --calibration calib.json

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>

#include <tokenaudit/agreement.hpp>
#include <tokenaudit/annotation.hpp>
#include <tokenaudit/annotation_service.hpp>
#include <tokenaudit/attribution.hpp>
#include <tokenaudit/backend_factory.hpp>
#include <tokenaudit/calibration.hpp>
#include <tokenaudit/conformance.hpp>
#include <tokenaudit/corpus.hpp>
#include <tokenaudit/heatmap.hpp>
#include <tokenaudit/report.hpp>

namespace ta = tokenaudit;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// --threshold wins over --calibration; one of them is required.
struct ThresholdSource {
    std::optional<double> threshold;
    std::string calibration;

    void add(CLI::App* cmd) {
        cmd->add_option("--threshold", threshold, "Similarity threshold; below it an easy instance is 'different'");
        cmd->add_option("--calibration", calibration, "Calibration JSON produced by 'calibrate'")->check(CLI::ExistingFile);
    }

    ta::CalibrationResult resolve() const {
        if (threshold) {
            ta::CalibrationResult r;
            r.threshold = *threshold;
            return r;
        }
        if (calibration.empty()) throw ta::Error(ta::ErrorCode::invalid_argument, "need --threshold or --calibration");
        return ta::read_calibration_file(calibration);
    }
};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

ta::AttributionScope parse_scope(const std::string& s) { return ta::AttributionScope::parse(s); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audit whether two classifiers rely on the same input tokens"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tokenaudit 0.3.0");

    // attribute
    auto* attribute = app.add_subcommand("attribute", "Compute word-omission attribution vectors for one backend");
    std::string corpus_path, manifest_path, backend_path, scope_text = "full", out_path, cache_path, failures_path;
    std::size_t workers = 1;
    bool fail_fast = false;
    attribute->add_option("--corpus", corpus_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    attribute->add_option("--manifest", manifest_path, "Corpus manifest JSON")->required()->check(CLI::ExistingFile);
    attribute->add_option("--backend", backend_path, "Backend descriptor (TOML or JSON)")->required()->check(CLI::ExistingFile);
    attribute->add_option("--scope", scope_text, "full | partial:<segment>");
    attribute->add_option("--out", out_path, "Attribution JSONL to write")->required();
    attribute->add_option("--cache", cache_path, "Score cache JSONL (resumable runs)");
    attribute->add_option("--workers", workers, "Concurrent instances")->check(CLI::PositiveNumber);
    attribute->add_flag("--fail-fast", fail_fast, "Abort on the first per-instance failure");
    attribute->add_option("--failures", failures_path, "Write per-instance failures as JSON");

    // compare
    auto* compare = app.add_subcommand("compare", "Pair main and biased attributions and score cosine agreement");
    std::string main_path, biased_path;
    bool allow_partial = false;
    compare->add_option("--main", main_path, "Main-model attribution JSONL")->required()->check(CLI::ExistingFile);
    compare->add_option("--biased", biased_path, "Biased-model attribution JSONL")->required()->check(CLI::ExistingFile);
    compare->add_option("--scope", scope_text, "full | partial:<segment>");
    compare->add_option("--out", out_path, "Agreement JSONL to write")->required();
    compare->add_flag("--allow-partial-coverage", allow_partial, "Pair the shared instances when coverage differs");

    // histogram
    auto* histogram = app.add_subcommand("histogram", "Equal-width histogram of easy-instance similarities");
    std::string agreement_path;
    std::size_t bins = 20;
    histogram->add_option("--agreement", agreement_path, "Agreement JSONL")->required()->check(CLI::ExistingFile);
    histogram->add_option("--bins", bins, "Number of bins")->check(CLI::PositiveNumber);
    histogram->add_option("--out", out_path, "Histogram JSON to write");

    // sample
    auto* sample = app.add_subcommand("sample", "Draw annotation tasks uniformly across the similarity scale");
    std::optional<std::size_t> quota, total;
    std::size_t overlap = 40;
    std::uint64_t seed = 0;
    std::string annotators = "a1,a2";
    sample->add_option("--agreement", agreement_path, "Agreement JSONL")->required()->check(CLI::ExistingFile);
    sample->add_option("--bins", bins, "Equal-width bins")->check(CLI::PositiveNumber);
    auto* quota_opt = sample->add_option("--quota", quota, "Items per bin");
    sample->add_option("--total", total, "Items overall, spread over the bins")->excludes(quota_opt);
    sample->add_option("--overlap", overlap, "Items judged by every annotator");
    sample->add_option("--seed", seed, "Sampling seed");
    sample->add_option("--annotators", annotators, "Comma-separated annotator ids");
    sample->add_option("--out", out_path, "Task JSONL to write")->required();

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Tune the similarity threshold against human judgments");
    std::string annotations_path;
    std::optional<double> holdout;
    calibrate->add_option("--agreement", agreement_path, "Agreement JSONL")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--annotations", annotations_path, "Annotation JSONL")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--holdout", holdout, "Fraction of labels held out for evaluation")->check(CLI::Range(0.0, 1.0));
    calibrate->add_option("--seed", seed, "Holdout split seed");
    calibrate->add_option("--out", out_path, "Calibration JSON to write")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "Split easy instances into similar / different");
    ThresholdSource classify_threshold;
    classify->add_option("--agreement", agreement_path, "Agreement JSONL")->required()->check(CLI::ExistingFile);
    classify_threshold.add(classify);
    classify->add_option("--out", out_path, "Per-instance partition JSONL to write");

    // report
    auto* report = app.add_subcommand("report", "Summary table, label distributions, JSON and HTML report");
    ThresholdSource report_threshold;
    std::string setting = "audit", json_out, html_out;
    report->add_option("--corpus", corpus_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    report->add_option("--manifest", manifest_path, "Corpus manifest JSON")->required()->check(CLI::ExistingFile);
    report->add_option("--agreement", agreement_path, "Agreement JSONL")->required()->check(CLI::ExistingFile);
    report_threshold.add(report);
    report->add_option("--setting", setting, "Setting name, e.g. MNLI-Partial");
    report->add_option("--json", json_out, "Summary JSON to write");
    report->add_option("--html", html_out, "Summary HTML to write");

    // render
    auto* render = app.add_subcommand("render", "Write token heatmap pages for selected instances");
    ThresholdSource render_threshold;
    std::string ids, out_dir;
    bool render_all = false, render_different = false;
    render->add_option("--manifest", manifest_path, "Corpus manifest JSON")->required()->check(CLI::ExistingFile);
    render->add_option("--main", main_path, "Main-model attribution JSONL")->required()->check(CLI::ExistingFile);
    render->add_option("--biased", biased_path, "Biased-model attribution JSONL")->required()->check(CLI::ExistingFile);
    render->add_option("--agreement", agreement_path, "Agreement JSONL (similarities)")->check(CLI::ExistingFile);
    render->add_option("--ids", ids, "Comma-separated instance ids");
    render->add_flag("--all", render_all, "Every instance present in both files");
    render->add_flag("--different", render_different, "Easy instances below the threshold (needs --agreement)");
    render_threshold.add(render);
    render->add_option("--out-dir", out_dir, "Output directory")->required();

    // serve-annotation
    auto* serve = app.add_subcommand("serve-annotation", "Serve the annotation task API");
    std::string tasks_path, host = "127.0.0.1", static_dir;
    int port = 8700;
    bool hide_predictions = false;
    serve->add_option("--tasks", tasks_path, "Task JSONL from 'sample'")->required()->check(CLI::ExistingFile);
    serve->add_option("--main", main_path, "Main-model attribution JSONL")->required()->check(CLI::ExistingFile);
    serve->add_option("--biased", biased_path, "Biased-model attribution JSONL")->required()->check(CLI::ExistingFile);
    serve->add_option("--manifest", manifest_path, "Corpus manifest JSON")->required()->check(CLI::ExistingFile);
    serve->add_option("--annotations", annotations_path, "Annotation JSONL (appended; resumed on restart)")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks one)")->check(CLI::Range(0, 65535));
    serve->add_flag("--hide-predictions", hide_predictions, "Do not show model predictions to annotators");
    serve->add_option("--static-dir", static_dir, "Directory of UI assets to serve at /")->check(CLI::ExistingDirectory);

    // check-backend
    auto* check = app.add_subcommand("check-backend", "Run the /v1 protocol conformance suite against a server");
    std::string endpoint, labels;
    std::vector<std::size_t> ignored;
    std::size_t probes = 8;
    check->add_option("--endpoint", endpoint, "Server address, e.g. http://127.0.0.1:8500")->required();
    check->add_option("--corpus", corpus_path, "Corpus JSONL to draw probe inputs from")->required()->check(CLI::ExistingFile);
    check->add_option("--manifest", manifest_path, "Corpus manifest JSON")->required()->check(CLI::ExistingFile);
    check->add_option("--probes", probes, "Number of probe inputs")->check(CLI::PositiveNumber);
    check->add_option("--ignored-segment", ignored, "Segment position the model must ignore (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*attribute) {
            const auto manifest = ta::load_manifest(manifest_path);
            const auto corpus = ta::load_corpus(corpus_path, manifest);
            const auto backend = ta::load_backend(backend_path);
            std::shared_ptr<ta::ScoreCache> cache;
            if (!cache_path.empty()) cache = std::make_shared<ta::ScoreCache>(cache_path);
            ta::AttributionOptions options;
            options.workers = workers;
            options.fail_fast = fail_fast;
            const auto rep = ta::attribute_corpus(*backend, corpus, parse_scope(scope_text), out_path, options, cache);
            std::cout << "attributed " << rep.written << " of " << corpus.size() << " instances with '"
                      << backend->id() << "' -> " << out_path << "\n";
            if (!failures_path.empty()) {
                ta::Json failures = ta::Json::array();
                for (const auto& f : rep.failures) {
                    failures.push_back({{"instance", f.instance}, {"error", ta::to_string(f.code)}, {"message", f.message}});
                }
                ta::write_text_atomic(failures_path, failures.dump(2) + "\n");
            }
            for (const auto& f : rep.failures) std::cerr << "failed: " << f.instance << ": " << f.message << "\n";
            return rep.failures.empty() ? 0 : 2;
        }

        if (*compare) {
            const auto scope = parse_scope(scope_text);
            const auto result = ta::pair_and_score(std::filesystem::path(main_path), std::filesystem::path(biased_path), scope);
            if (!result.full_coverage()) {
                std::cerr << "coverage: " << result.only_main.size() << " instance(s) only in main, "
                          << result.only_biased.size() << " only in biased\n";
                if (!allow_partial) {
                    throw ta::Error(ta::ErrorCode::coverage_mismatch, "attribution files cover different instances");
                }
            }
            ta::write_agreement_file(out_path, result.records);
            const auto part = ta::classify_different(result.records, -2.0);
            std::cout << "paired " << ta::format_count(result.records.size()) << ", easy "
                      << ta::format_count_percent(part.easy, result.records.size()) << ", scored "
                      << ta::format_count(part.scored) << ", degenerate " << ta::format_count(part.degenerate)
                      << " -> " << out_path << "\n";
            return 0;
        }

        if (*histogram) {
            const auto h = ta::similarity_histogram(ta::read_agreement_file(agreement_path), bins);
            std::size_t peak = 1;
            for (auto c : h.counts) peak = std::max(peak, c);
            for (std::size_t b = 0; b < h.bins(); ++b) {
                std::cout << "[" << fixed(h.edges[b], 3) << ", " << fixed(h.edges[b + 1], 3)
                          << (b + 1 == h.bins() ? "] " : ") ") << std::string(h.counts[b] * 50 / peak, '#') << " "
                          << h.counts[b] << "\n";
            }
            if (!out_path.empty()) {
                ta::write_text_atomic(out_path, ta::Json{{"edges", h.edges}, {"counts", h.counts}}.dump(2) + "\n");
            }
            return 0;
        }

        if (*sample) {
            if (!quota && !total) throw ta::Error(ta::ErrorCode::invalid_argument, "need --quota or --total");
            auto plan = quota ? ta::SamplePlan::with_quota(*quota, bins) : ta::SamplePlan::with_total(*total, bins);
            plan.overlap = overlap;
            plan.seed = seed;
            plan.annotators = split_list(annotators);
            const auto result = ta::sample_for_annotation(ta::read_agreement_file(agreement_path), plan);
            ta::write_task_file(out_path, result.tasks);
            std::size_t shared = 0;
            for (const auto& t : result.tasks) shared += t.overlap ? 1 : 0;
            std::cout << "sampled " << result.tasks.size() << " tasks (" << shared << " shared) over "
                      << result.histogram.bins() << " bins -> " << out_path << "\n";
            return 0;
        }

        if (*calibrate) {
            const auto records = ta::read_agreement_file(agreement_path);
            const auto annotations = ta::read_annotation_file(annotations_path);
            const auto joined = ta::join_labels(records, annotations);
            if (joined.unknown || joined.unscored) {
                std::cerr << "skipped " << joined.unknown << " annotated instance(s) missing from the agreement file and "
                          << joined.unscored << " without a similarity\n";
            }
            auto result = holdout ? ta::tune_threshold_with_holdout(joined.labeled, *holdout, seed)
                                  : ta::tune_threshold(joined.labeled);
            if (ta::overlap_agreement(annotations).shared > 0) result.iaa = ta::iaa(annotations);
            ta::write_calibration_file(out_path, result);
            std::cout << "threshold " << fixed(result.threshold, 6) << ", F1(different) "
                      << fixed(result.f1_negative, 3) << ", AUC " << fixed(result.auc, 3);
            if (result.iaa) std::cout << ", IAA " << fixed(*result.iaa, 3);
            std::cout << " -> " << out_path << "\n";
            return 0;
        }

        if (*classify) {
            const auto records = ta::read_agreement_file(agreement_path);
            const auto cal = classify_threshold.resolve();
            const auto p = ta::classify_different(records, cal.threshold);
            if (!out_path.empty()) {
                ta::JsonlWriter writer(out_path);
                for (const auto& r : records) {
                    if (!r.easy) continue;
                    ta::OrderedJson j{{"instance", r.instance},
                                      {"similarity", r.similarity ? ta::OrderedJson(*r.similarity) : ta::OrderedJson(nullptr)},
                                      {"different", r.similarity && *r.similarity < cal.threshold}};
                    writer.write(j);
                }
            }
            std::cout << "threshold " << fixed(cal.threshold, 6) << ": easy " << ta::format_count(p.easy)
                      << ", different " << ta::format_count_percent(p.different, p.easy) << ", similar "
                      << ta::format_count(p.similar) << ", degenerate " << ta::format_count(p.degenerate) << "\n";
            return 0;
        }

        if (*report) {
            const auto corpus = ta::load_corpus(corpus_path, ta::load_manifest(manifest_path));
            const auto summary = ta::build_summary(setting, corpus, ta::read_agreement_file(agreement_path),
                                                   report_threshold.resolve());
            std::cout << ta::summary_table({summary});
            if (!json_out.empty()) ta::write_text_atomic(json_out, ta::summary_to_json(summary).dump(2) + "\n");
            if (!html_out.empty()) ta::write_text_atomic(html_out, ta::summary_html(summary));
            return 0;
        }

        if (*render) {
            const auto manifest = ta::load_manifest(manifest_path);
            const auto main_attrs = ta::read_attribution_file(main_path);
            const auto biased_attrs = ta::read_attribution_file(biased_path);
            std::vector<ta::AgreementRecord> records;
            if (!agreement_path.empty()) records = ta::read_agreement_file(agreement_path);
            std::vector<std::string> selected = split_list(ids);
            if (render_all) {
                std::unordered_set<std::string> in_biased;
                for (const auto& v : biased_attrs) in_biased.insert(v.instance);
                for (const auto& v : main_attrs) {
                    if (in_biased.count(v.instance)) selected.push_back(v.instance);
                }
            }
            if (render_different) {
                if (records.empty()) throw ta::Error(ta::ErrorCode::invalid_argument, "--different needs --agreement");
                const auto p = ta::classify_different(records, render_threshold.resolve().threshold);
                selected.insert(selected.end(), p.different_ids.begin(), p.different_ids.end());
            }
            if (selected.empty()) throw ta::Error(ta::ErrorCode::invalid_argument, "no instances selected");
            const auto pages = ta::render_heatmaps(selected, main_attrs, biased_attrs, manifest.labels, records, out_dir);
            std::cout << "wrote " << pages.size() << " heatmap page(s) to " << out_dir << "\n";
            return 0;
        }

        if (*serve) {
            const auto manifest = ta::load_manifest(manifest_path);
            const auto tasks = ta::read_task_file(tasks_path);
            const auto main_attrs = ta::read_attribution_file(main_path);
            const auto biased_attrs = ta::read_attribution_file(biased_path);
            std::unordered_map<std::string, const ta::AttributionVector*> biased_by_id;
            for (const auto& v : biased_attrs) biased_by_id.emplace(v.instance, &v);
            std::unordered_set<std::string> wanted;
            for (const auto& t : tasks) wanted.insert(t.instance);
            std::unordered_map<std::string, ta::Json> payloads;
            for (const auto& v : main_attrs) {
                const auto it = biased_by_id.find(v.instance);
                if (!wanted.count(v.instance) || it == biased_by_id.end()) continue;
                payloads.emplace(v.instance, ta::task_payload(v, *it->second, manifest.labels, hide_predictions));
            }
            for (const auto& id : wanted) {
                if (!payloads.count(id)) throw ta::Error(ta::ErrorCode::missing_id, "no attribution pair for task instance '" + id + "'");
            }
            ta::AnnotationSession session(tasks, annotations_path);
            ta::AnnotationServerOptions options;
            options.host = host;
            options.port = port;
            options.hide_predictions = hide_predictions;
            options.static_dir = static_dir;
            ta::AnnotationServer server(session, std::move(payloads), options);
            const int bound = server.bind();
            std::cout << "serving " << tasks.size() << " tasks on http://" << host << ":" << bound << " ("
                      << session.judgment_count() << " judgments already recorded)" << std::endl;
            server.listen();
            return 0;
        }

        if (*check) {
            const auto corpus = ta::load_corpus(corpus_path, ta::load_manifest(manifest_path));
            ta::ConformanceProbe probe;
            probe.expected_labels = corpus.labels().names();
            probe.ignored_segments = ignored;
            for (std::size_t i = 0; i < corpus.size() && i < probes; ++i) {
                std::vector<std::string> texts;
                for (const auto& s : corpus.instances()[i].segments) texts.push_back(s.text);
                probe.inputs.push_back(std::move(texts));
            }
            ta::RemoteOptions options;
            options.endpoint = endpoint;
            bool ok = true;
            for (const auto& c : ta::run_conformance(options, probe)) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
                if (!c.detail.empty()) std::cout << ": " << c.detail;
                std::cout << "\n";
                ok = ok && c.passed;
            }
            return ok ? 0 : 1;
        }
    } catch (const ta::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
