// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/quality.hpp"

#include <numeric>
#include <stdexcept>

namespace semra {

double Allocation::total() const {
    return std::accumulate(powers.begin(), powers.end(), 0.0);
}

QualityReport quality_from_drops(std::span<const double> importances, std::span<const double> drops) {
    if (importances.size() != drops.size()) {
        throw std::invalid_argument("quality: importance/drop length mismatch");
    }
    QualityReport rep;
    rep.per_triplet_drop.assign(drops.begin(), drops.end());
    rep.per_triplet_contrib.resize(drops.size());
    for (std::size_t j = 0; j < drops.size(); ++j) {
        rep.per_triplet_contrib[j] = importances[j] * (1.0 - drops[j]);
        rep.total += rep.per_triplet_contrib[j];
    }
    return rep;
}

QualityReport transmission_quality(const ImageRecord& record, const Allocation& alloc,
                                   const ChannelParams& chan, const CodingParams& coding) {
    if (alloc.size() != record.size()) {
        throw std::invalid_argument("transmission_quality: allocation length " + std::to_string(alloc.size()) +
                                    " != triplet count " + std::to_string(record.size()));
    }
    std::vector<double> drops(record.size());
    for (std::size_t j = 0; j < drops.size(); ++j) {
        drops[j] = drop_prob_at_power(alloc.powers[j], chan, coding);
    }
    const auto imps = record.importances();
    return quality_from_drops(imps, drops);
}

double transmission_quality(std::span<const double> importances, std::span<const double> powers,
                            const ChannelParams& chan, const CodingParams& coding) {
    if (importances.size() != powers.size()) {
        throw std::invalid_argument("transmission_quality: allocation length mismatch");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < powers.size(); ++j) {
        total += importances[j] * (1.0 - drop_prob_at_power(powers[j], chan, coding));
    }
    return total;
}

double aggregate_users(std::span<const QualityReport> reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate_users: empty report list");
    double sum = 0.0;
    for (const auto& r : reports) sum += r.total;
    return sum;
}

double quality_upper_bound(const ImageRecord& record) {
    double sum = 0.0;
    for (const auto& t : record.triplets) sum += t.importance;
    return sum;
}

}  // namespace semra
