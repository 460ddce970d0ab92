// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "semra/channel.hpp"
#include "semra/corpus.hpp"

namespace semra {

/// One allocation decision: a user's image, that user's link, and the power
/// share available for it.
struct Scenario {
    std::vector<double> importances;
    ChannelParams chan;
    CodingParams coding;
    double budget = 0.0;  // W

    std::size_t size() const { return importances.size(); }
    /// Quality of spending the budget according to masked softmax(logits).
    double quality_of_logits(std::span<const double> logits) const;
};

/// A pool of scenarios covering `users` users. The mean per-round quality is
/// users times the mean scenario quality (each round serves every user once).
struct Workload {
    std::vector<Scenario> scenarios;
    std::size_t users = 1;
};

/// Every user receives every record with a per-user share total_budget / U.
Workload make_workload(const Corpus& corpus, std::span<const ChannelParams> users,
                       const CodingParams& coding, double total_budget);

enum class StaticScheme { equal, importance };

/// Mean per-round quality of a fixed allocator over a workload.
double evaluate_static(const Workload& workload, StaticScheme scheme);

/// Fixed layout of the conditioning vector:
///   [0, n_max)         importances, zero padded
///   [n_max, 2 n_max)   slot mask (1 = real triplet)
///   then log10(gain / noise), budget / budget_scale, log10(budget * gain / noise),
///   N / n_max, L_T / 4096, L_E / L_T.
struct EnvLayout {
    std::size_t n_max = 8;
    double budget_scale = 1000.0;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * n_max + 6); }
    /// Row holding log10(budget * gain / noise).
    Eigen::Index link_budget_row() const { return static_cast<Eigen::Index>(2 * n_max + 2); }
};

/// Conditioning vector for one scenario plus the count of active slots.
struct EnvironmentVector {
    Eigen::VectorXd values;
    std::size_t active = 0;
};

EnvironmentVector encode_environment(const Scenario& s, const EnvLayout& layout);

/// Column-stacked environments for batched network evaluation.
struct EnvBatch {
    Eigen::MatrixXd features;  // dim x batch
    std::vector<std::size_t> active;

    Eigen::Index batch() const { return features.cols(); }
};

EnvBatch make_env_batch(std::span<const Scenario* const> scenarios, const EnvLayout& layout);
EnvBatch make_env_batch(std::span<const Scenario> scenarios, const EnvLayout& layout);

}  // namespace semra
