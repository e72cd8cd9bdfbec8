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

#include <tokenaudit/linear_models.hpp>

#include <algorithm>
#include <cmath>

#include <tokenaudit/errors.hpp>

namespace tokenaudit {
namespace {

std::size_t label_index(const LabelSet& labels, const std::string& name) {
    const auto idx = labels.index_of(name);
    if (!idx) throw Error(ErrorCode::unknown_label, "weights refer to unknown label '" + name + "'");
    return *idx;
}

double finite_number(const Json& v, const std::string& what) {
    if (!v.is_number()) throw Error(ErrorCode::schema_violation, what + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorCode::schema_violation, what + " must be finite");
    return x;
}

}  // namespace

LinearTokenModel::LinearTokenModel(std::string id, LabelSet labels, std::vector<std::string> consumed,
                                   const Tokenizer& tokenizer)
    : tokenizer_(tokenizer),
      id_(std::move(id)),
      labels_(std::move(labels)),
      consumed_(std::move(consumed)),
      biases_(labels_.size(), 0.0) {
    if (id_.empty()) throw Error(ErrorCode::invalid_argument, "backend id is empty");
    if (labels_.empty()) throw Error(ErrorCode::invalid_argument, "backend '" + id_ + "' has no labels");
}

void LinearTokenModel::set_bias(std::size_t label, double bias) { biases_.at(label) = bias; }

void LinearTokenModel::set_weight_for_key(std::string key, std::size_t label, double weight) {
    if (label >= labels_.size()) throw Error(ErrorCode::unknown_label, "label index out of range");
    auto& row = weights_[std::move(key)];
    if (row.empty()) row.assign(labels_.size(), 0.0);
    row[label] = weight;
}

double LinearTokenModel::weight_for_key(const std::string& key, std::size_t label) const {
    const auto it = weights_.find(key);
    return it == weights_.end() ? 0.0 : it->second.at(label);
}

void LinearTokenModel::load_bias(const Json& doc) {
    if (!doc.contains("bias")) return;
    for (const auto& [label, value] : doc.at("bias").items()) {
        set_bias(label_index(labels_, label), finite_number(value, "bias for '" + label + "'"));
    }
}

std::vector<ScoreVector> LinearTokenModel::do_score(std::span<const ScoreInput> inputs) const {
    std::vector<ScoreVector> out;
    out.reserve(inputs.size());
    for (const auto& input : inputs) {
        ScoreVector v{biases_};
        for (const auto& seg : input.segments) {
            if (!consumed_.empty() && std::find(consumed_.begin(), consumed_.end(), seg.name) == consumed_.end()) {
                continue;
            }
            for (const auto& token : tokenizer_.split(seg.text)) {
                const auto it = weights_.find(key_for(seg.name, token));
                if (it == weights_.end()) continue;
                for (std::size_t c = 0; c < v.logits.size(); ++c) v.logits[c] += it->second[c];
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

LexiconModel::LexiconModel(std::string id, LabelSet labels, std::vector<std::string> consumed,
                           const Tokenizer& tokenizer)
    : LinearTokenModel(std::move(id), std::move(labels), std::move(consumed), tokenizer) {}

std::string LexiconModel::key_for(std::string_view, std::string_view token) const { return std::string(token); }

void LexiconModel::set_weight(std::string_view token, std::size_t label, double weight) {
    set_weight_for_key(std::string(token), label, weight);
}

double LexiconModel::weight(std::string_view token, std::size_t label) const {
    return weight_for_key(std::string(token), label);
}

std::shared_ptr<LexiconModel> LexiconModel::from_json(std::string id, LabelSet labels, const Json& doc,
                                                      std::vector<std::string> consumed) {
    if (!doc.is_object()) throw Error(ErrorCode::schema_violation, "lexicon weights must be an object");
    auto model = std::make_shared<LexiconModel>(std::move(id), std::move(labels), std::move(consumed));
    model->load_bias(doc);
    if (doc.contains("weights")) {
        for (const auto& [label, table] : doc.at("weights").items()) {
            const std::size_t c = label_index(model->labels(), label);
            for (const auto& [token, w] : table.items()) {
                model->set_weight(token, c, finite_number(w, "weight for '" + token + "'"));
            }
        }
    }
    return model;
}

LinearBowModel::LinearBowModel(std::string id, LabelSet labels, std::vector<std::string> consumed,
                               const Tokenizer& tokenizer)
    : LinearTokenModel(std::move(id), std::move(labels), std::move(consumed), tokenizer) {}

std::string LinearBowModel::key_for(std::string_view segment, std::string_view token) const {
    std::string key(segment);
    key.push_back('\x1f');
    key += token;
    return key;
}

void LinearBowModel::set_weight(std::string_view segment, std::string_view token, std::size_t label,
                                double weight) {
    set_weight_for_key(key_for(segment, token), label, weight);
}

double LinearBowModel::weight(std::string_view segment, std::string_view token, std::size_t label) const {
    return weight_for_key(key_for(segment, token), label);
}

std::shared_ptr<LinearBowModel> LinearBowModel::from_json(std::string id, LabelSet labels, const Json& doc,
                                                          std::vector<std::string> consumed) {
    if (!doc.is_object()) throw Error(ErrorCode::schema_violation, "linear-bow weights must be an object");
    auto model = std::make_shared<LinearBowModel>(std::move(id), std::move(labels), std::move(consumed));
    model->load_bias(doc);
    if (doc.contains("weights")) {
        for (const auto& [segment, per_label] : doc.at("weights").items()) {
            for (const auto& [label, table] : per_label.items()) {
                const std::size_t c = label_index(model->labels(), label);
                for (const auto& [token, w] : table.items()) {
                    model->set_weight(segment, token, c, finite_number(w, "weight for '" + token + "'"));
                }
            }
        }
    }
    return model;
}

}  // namespace tokenaudit
