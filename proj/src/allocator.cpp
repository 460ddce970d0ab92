// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace semra {

Budget::Budget(double total_power) : total_(total_power) {
    if (!(total_power > 0.0) || !std::isfinite(total_power)) {
        throw std::invalid_argument("budget: total_power must be > 0");
    }
}

Allocation equal_allocation(std::size_t n, Budget budget) {
    if (n == 0) throw std::invalid_argument("equal_allocation: n must be >= 1");
    return {std::vector<double>(n, budget.total_power() / static_cast<double>(n))};
}

Allocation importance_allocation(std::span<const double> importances, Budget budget) {
    double sum = 0.0;
    for (double v : importances) {
        if (!(v >= 0.0)) throw std::invalid_argument("importance_allocation: negative importance");
        sum += v;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("importance_allocation: all importances are zero");
    Allocation out;
    out.powers.reserve(importances.size());
    for (double v : importances) out.powers.push_back(budget.total_power() * v / sum);
    return out;
}

void masked_softmax(std::span<const double> logits, std::size_t active, std::span<double> fractions) {
    double top = logits[0];
    for (std::size_t j = 1; j < active; ++j) top = std::max(top, logits[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < active; ++j) {
        fractions[j] = std::exp(logits[j] - top);
        sum += fractions[j];
    }
    for (std::size_t j = 0; j < active; ++j) fractions[j] /= sum;
    std::fill(fractions.begin() + static_cast<std::ptrdiff_t>(active), fractions.end(), 0.0);
}

Allocation softmax_allocation(std::span<const double> logits, Budget budget) {
    if (logits.empty()) throw std::invalid_argument("softmax_allocation: empty logits");
    for (double z : logits) {
        if (!std::isfinite(z)) throw std::invalid_argument("softmax_allocation: non-finite logit");
    }
    Allocation out;
    out.powers.resize(logits.size());
    masked_softmax(logits, logits.size(), out.powers);
    for (double& p : out.powers) p *= budget.total_power();
    return out;
}

OracleResult grid_oracle(const ImageRecord& record, Budget budget, const ChannelParams& chan,
                         const CodingParams& coding, std::size_t resolution) {
    const auto imps = record.importances();
    return grid_oracle(imps, budget, chan, coding, resolution);
}

OracleResult grid_oracle(std::span<const double> importances, Budget budget, const ChannelParams& chan,
                         const CodingParams& coding, std::size_t resolution) {
    const std::size_t n = importances.size();
    if (n == 0) throw std::invalid_argument("grid_oracle: empty record");
    if (n > kOracleMaxTriplets) {
        throw std::invalid_argument("grid_oracle: at most " + std::to_string(kOracleMaxTriplets) +
                                    " triplets supported, got " + std::to_string(n));
    }
    if (resolution < 2) throw std::invalid_argument("grid_oracle: resolution must be >= 2");

    // Every grid point uses powers k * quantum, so success probabilities are
    // tabulated once per level.
    const double quantum = budget.total_power() / static_cast<double>(resolution);
    std::vector<double> delivered(resolution + 1);
    for (std::size_t k = 0; k <= resolution; ++k) {
        delivered[k] = 1.0 - drop_prob_at_power(static_cast<double>(k) * quantum, chan, coding);
    }

    std::vector<std::size_t> levels(n, 0);
    std::vector<std::size_t> best_levels;
    double best = -1.0;

    // Lexicographic walk over compositions of `resolution` into n parts; the
    // last part absorbs the remainder.
    auto visit = [&](auto&& self, std::size_t idx, std::size_t remaining, double partial) -> void {
        if (idx + 1 == n) {
            levels[idx] = remaining;
            const double q = partial + importances[idx] * delivered[remaining];
            if (q > best) {
                best = q;
                best_levels = levels;
            }
            return;
        }
        for (std::size_t k = 0; k <= remaining; ++k) {
            levels[idx] = k;
            self(self, idx + 1, remaining - k, partial + importances[idx] * delivered[k]);
        }
    };
    visit(visit, 0, resolution, 0.0);

    OracleResult res;
    res.allocation.powers.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        res.allocation.powers[j] = static_cast<double>(best_levels[j]) * quantum;
    }
    // quality equals transmission_quality of the returned allocation exactly.
    res.quality = transmission_quality(importances, res.allocation.powers, chan, coding);
    return res;
}

}  // namespace semra
