// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>

#include "semra/channel.hpp"
#include "semra/corpus.hpp"
#include "semra/quality.hpp"

namespace semra {

/// Total transmit power available to one allocation decision.
class Budget {
public:
    explicit Budget(double total_power);
    double total_power() const { return total_; }

private:
    double total_;
};

Allocation equal_allocation(std::size_t n, Budget budget);

/// Powers proportional to importance. Throws if every importance is zero.
Allocation importance_allocation(std::span<const double> importances, Budget budget);

/// Budget times softmax(logits). Max-subtracted; rejects non-finite logits.
Allocation softmax_allocation(std::span<const double> logits, Budget budget);

/// softmax restricted to the first `active` logits, written into `fractions`
/// (entries past `active` are set to 0). No validation; hot-path helper.
void masked_softmax(std::span<const double> logits, std::size_t active, std::span<double> fractions);

struct OracleResult {
    Allocation allocation;
    double quality = 0.0;
};

inline constexpr std::size_t kOracleMaxTriplets = 4;

/// Exhaustive search over the budget simplex discretized into `resolution`
/// equal power quanta. Ties go to the lexicographically smallest allocation.
OracleResult grid_oracle(const ImageRecord& record, Budget budget, const ChannelParams& chan,
                         const CodingParams& coding, std::size_t resolution = 100);

OracleResult grid_oracle(std::span<const double> importances, Budget budget, const ChannelParams& chan,
                         const CodingParams& coding, std::size_t resolution = 100);

}  // namespace semra
