// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/environment.hpp"

#include <cmath>
#include <stdexcept>

#include "semra/allocator.hpp"
#include "semra/quality.hpp"

namespace semra {

double Scenario::quality_of_logits(std::span<const double> logits) const {
    const std::size_t n = importances.size();
    std::vector<double> powers(n);
    masked_softmax(logits, n, powers);
    for (double& p : powers) p *= budget;
    return transmission_quality(importances, powers, chan, coding);
}

Workload make_workload(const Corpus& corpus, std::span<const ChannelParams> users,
                       const CodingParams& coding, double total_budget) {
    if (users.empty()) throw std::invalid_argument("workload: need at least one user");
    if (corpus.records.empty()) throw std::invalid_argument("workload: empty corpus");
    Budget share(total_budget / static_cast<double>(users.size()));
    Workload w;
    w.users = users.size();
    for (const auto& chan : users) {
        for (const auto& rec : corpus.records) {
            w.scenarios.push_back({rec.importances(), chan, coding, share.total_power()});
        }
    }
    return w;
}

double evaluate_static(const Workload& workload, StaticScheme scheme) {
    if (workload.scenarios.empty()) throw std::invalid_argument("evaluate_static: empty workload");
    double sum = 0.0;
    for (const auto& s : workload.scenarios) {
        const Budget budget(s.budget);
        const auto alloc = scheme == StaticScheme::equal ? equal_allocation(s.size(), budget)
                                                         : importance_allocation(s.importances, budget);
        sum += transmission_quality(s.importances, alloc.powers, s.chan, s.coding);
    }
    return static_cast<double>(workload.users) * sum / static_cast<double>(workload.scenarios.size());
}

EnvironmentVector encode_environment(const Scenario& s, const EnvLayout& layout) {
    const std::size_t n = s.size();
    if (n == 0 || n > layout.n_max) {
        throw std::invalid_argument("environment: triplet count " + std::to_string(n) + " outside [1, " +
                                    std::to_string(layout.n_max) + "]");
    }
    EnvironmentVector e;
    e.active = n;
    e.values = Eigen::VectorXd::Zero(layout.dim());
    const auto nm = static_cast<Eigen::Index>(layout.n_max);
    for (std::size_t j = 0; j < n; ++j) {
        e.values[static_cast<Eigen::Index>(j)] = s.importances[j];
        e.values[nm + static_cast<Eigen::Index>(j)] = 1.0;
    }
    const double gain_per_watt = s.chan.pathloss_gain / s.chan.noise_power;
    e.values[2 * nm + 0] = std::log10(gain_per_watt);
    e.values[2 * nm + 1] = s.budget / layout.budget_scale;
    e.values[2 * nm + 2] = std::log10(s.budget * gain_per_watt);
    e.values[2 * nm + 3] = static_cast<double>(n) / static_cast<double>(layout.n_max);
    e.values[2 * nm + 4] = s.coding.triplet_bits / 4096.0;
    e.values[2 * nm + 5] = static_cast<double>(s.coding.correctable_bits) / s.coding.triplet_bits;
    return e;
}

EnvBatch make_env_batch(std::span<const Scenario* const> scenarios, const EnvLayout& layout) {
    EnvBatch b;
    b.features.resize(layout.dim(), static_cast<Eigen::Index>(scenarios.size()));
    b.active.reserve(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        auto e = encode_environment(*scenarios[i], layout);
        b.features.col(static_cast<Eigen::Index>(i)) = e.values;
        b.active.push_back(e.active);
    }
    return b;
}

EnvBatch make_env_batch(std::span<const Scenario> scenarios, const EnvLayout& layout) {
    std::vector<const Scenario*> ptrs;
    ptrs.reserve(scenarios.size());
    for (const auto& s : scenarios) ptrs.push_back(&s);
    return make_env_batch(ptrs, layout);
}

}  // namespace semra
