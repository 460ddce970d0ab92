// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace semra {

using nlohmann::json;

std::vector<double> ImageRecord::importances() const {
    std::vector<double> out;
    out.reserve(triplets.size());
    for (const auto& t : triplets) out.push_back(t.importance);
    return out;
}

std::size_t Corpus::max_triplets() const {
    std::size_t n = 0;
    for (const auto& r : records) n = std::max(n, r.size());
    return n;
}

double normalize_importance(double raw) {
    if (!(raw >= -1.0 && raw <= 1.0)) {
        throw std::domain_error("cosine score out of range [-1, 1]");
    }
    return std::max(raw, 0.0);
}

void validate(const Corpus& corpus) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& rec = corpus.records[i];
        const std::string where = "record " + std::to_string(i) + " (" + rec.image_id + ")";
        if (rec.image_id.empty()) throw validation_error(where + ": empty image_id");
        if (!seen.insert(rec.image_id).second) {
            throw validation_error(where + ": duplicate image_id");
        }
        if (rec.triplets.empty()) throw validation_error(where + ": no triplets");
        for (std::size_t j = 0; j < rec.triplets.size(); ++j) {
            const auto& t = rec.triplets[j];
            const std::string tw = where + ", triplet " + std::to_string(j);
            if (t.subject.empty()) throw validation_error(tw + ": empty subject");
            if (t.relation.empty()) throw validation_error(tw + ": empty relation");
            if (t.object.empty()) throw validation_error(tw + ": empty object");
            if (!(t.importance >= 0.0 && t.importance <= 1.0)) {
                throw validation_error(tw + ": importance out of range");
            }
        }
    }
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw validation_error(where + ": missing field '" + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) throw validation_error(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Corpus corpus_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("malformed corpus JSON: ") + e.what());
    }
    if (!doc.is_object()) throw validation_error("corpus: top level must be an object");

    Corpus corpus;
    const auto& prov = require(doc, "provenance", "corpus");
    if (!prov.is_object()) throw validation_error("corpus: field 'provenance' must be an object");
    const auto kind = require_string(prov, "kind", "provenance");
    if (kind == "synthetic") {
        corpus.provenance = Provenance::synthetic;
    } else if (kind == "scored") {
        corpus.provenance = Provenance::scored;
    } else {
        throw validation_error("provenance: unknown kind '" + kind + "'");
    }
    corpus.note = require_string(prov, "note", "provenance");

    const auto& records = require(doc, "records", "corpus");
    if (!records.is_array()) throw validation_error("corpus: field 'records' must be an array");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = "record " + std::to_string(i);
        if (!r.is_object()) throw validation_error(where + ": must be an object");
        ImageRecord rec;
        rec.image_id = require_string(r, "image_id", where);
        const auto& trips = require(r, "triplets", where);
        if (!trips.is_array()) throw validation_error(where + ": field 'triplets' must be an array");
        for (std::size_t j = 0; j < trips.size(); ++j) {
            const auto& t = trips[j];
            const std::string tw = where + ", triplet " + std::to_string(j);
            if (!t.is_object()) throw validation_error(tw + ": must be an object");
            SemanticTriplet st;
            st.subject = require_string(t, "subject", tw);
            st.relation = require_string(t, "relation", tw);
            st.object = require_string(t, "object", tw);
            const auto& imp = require(t, "importance", tw);
            if (!imp.is_number()) throw validation_error(tw + ": field 'importance' must be a number");
            st.importance = imp.get<double>();
            rec.triplets.push_back(std::move(st));
        }
        corpus.records.push_back(std::move(rec));
    }
    validate(corpus);
    return corpus;
}

std::string corpus_to_json_text(const Corpus& corpus) {
    json doc;
    doc["provenance"] = {
        {"kind", corpus.provenance == Provenance::synthetic ? "synthetic" : "scored"},
        {"note", corpus.note},
    };
    doc["records"] = json::array();
    for (const auto& rec : corpus.records) {
        json trips = json::array();
        for (const auto& t : rec.triplets) {
            trips.push_back({{"subject", t.subject},
                             {"relation", t.relation},
                             {"object", t.object},
                             {"importance", t.importance}});
        }
        doc["records"].push_back({{"image_id", rec.image_id}, {"triplets", std::move(trips)}});
    }
    return doc.dump(2) + "\n";
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return corpus_from_json_text(ss.str());
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    validate(corpus);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path.string());
    out << corpus_to_json_text(corpus);
}

Corpus synth_corpus(std::size_t num_images, std::size_t triplets_per_image, std::uint64_t seed) {
    if (num_images < 1 || triplets_per_image < 1) {
        throw std::invalid_argument("synth_corpus: counts must be >= 1");
    }
    static constexpr std::array subjects{"man", "woman", "dog", "car", "sign", "tree", "building",
                                         "boy", "horse", "bus", "table", "cat"};
    static constexpr std::array relations{"on", "near", "holding", "behind", "wearing", "has",
                                          "in front of", "riding", "under", "beside"};
    static constexpr std::array objects{"pole", "street", "hat", "grass", "window", "shirt",
                                        "road", "sky", "plate", "fence", "water", "bench"};

    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(2.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_s(0, subjects.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_r(0, relations.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_o(0, objects.size() - 1);

    Corpus corpus;
    corpus.provenance = Provenance::synthetic;
    corpus.note = "synth_corpus images=" + std::to_string(num_images) +
                  " triplets=" + std::to_string(triplets_per_image) + " seed=" + std::to_string(seed) +
                  " importance~Beta(2,2) sorted descending";
    corpus.records.reserve(num_images);
    for (std::size_t i = 0; i < num_images; ++i) {
        ImageRecord rec;
        rec.image_id = "synth-" + std::to_string(i);
        std::vector<double> imps(triplets_per_image);
        for (auto& v : imps) {
            const double a = gamma(rng);
            const double b = gamma(rng);
            v = a / (a + b);
        }
        std::sort(imps.begin(), imps.end(), std::greater<>());
        for (double imp : imps) {
            rec.triplets.push_back({subjects[pick_s(rng)], relations[pick_r(rng)], objects[pick_o(rng)], imp});
        }
        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

}  // namespace semra
