// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace semra {

/// Raised when a corpus file parses but violates a data-model invariant.
/// The message names the first offending record and field.
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a corpus file is not well-formed JSON.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SemanticTriplet {
    std::string subject;
    std::string relation;
    std::string object;
    double importance = 0.0;  // in [0, 1]

    bool operator==(const SemanticTriplet&) const = default;
};

/// One image and its extracted triplets. Triplet order defines the index j
/// used by allocations and quality reports.
struct ImageRecord {
    std::string image_id;
    std::vector<SemanticTriplet> triplets;

    std::size_t size() const { return triplets.size(); }
    std::vector<double> importances() const;

    bool operator==(const ImageRecord&) const = default;
};

enum class Provenance { synthetic, scored };

struct Corpus {
    std::vector<ImageRecord> records;
    Provenance provenance = Provenance::synthetic;
    std::string note;

    std::size_t max_triplets() const;

    bool operator==(const Corpus&) const = default;
};

/// Clamps a raw cosine score in [-1, 1] to an importance in [0, 1].
/// Throws std::domain_error outside [-1, 1].
double normalize_importance(double raw);

/// Throws validation_error naming the first violation.
void validate(const Corpus& corpus);

Corpus corpus_from_json_text(const std::string& text);
std::string corpus_to_json_text(const Corpus& corpus);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Deterministic synthetic corpus. Importances are Beta(2,2) draws sorted
/// descending within each record; triplet text is drawn from a small
/// scene-graph vocabulary.
Corpus synth_corpus(std::size_t num_images, std::size_t triplets_per_image, std::uint64_t seed);

}  // namespace semra
