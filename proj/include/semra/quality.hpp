// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "semra/channel.hpp"
#include "semra/corpus.hpp"

namespace semra {

/// Per-triplet transmit powers (W) for one image.
struct Allocation {
    std::vector<double> powers;

    double total() const;
    std::size_t size() const { return powers.size(); }
};

struct QualityReport {
    std::vector<double> per_triplet_drop;
    std::vector<double> per_triplet_contrib;  // I_j * (1 - P_dj)
    double total = 0.0;
};

/// Quality from importances and already-computed drop probabilities.
QualityReport quality_from_drops(std::span<const double> importances, std::span<const double> drops);

/// Semantic transmission quality sum_j I_j (1 - P_dj) of delivering one
/// image's triplets with the given powers. A zero-power triplet is still sent
/// (at ber 0.5 under either fading model).
QualityReport transmission_quality(const ImageRecord& record, const Allocation& alloc,
                                   const ChannelParams& chan, const CodingParams& coding);

/// Same metric from raw importances; used on hot paths that carry no text.
double transmission_quality(std::span<const double> importances, std::span<const double> powers,
                            const ChannelParams& chan, const CodingParams& coding);

/// Multi-user aggregate: the unweighted sum of per-user totals.
double aggregate_users(std::span<const QualityReport> reports);

double quality_upper_bound(const ImageRecord& record);

}  // namespace semra
