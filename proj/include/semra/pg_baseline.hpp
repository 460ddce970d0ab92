// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "semra/diffusion_policy.hpp"
#include "semra/environment.hpp"
#include "semra/mlp.hpp"

namespace semra {

/// Gaussian policy over allocation logits: a ~ N(mu(e), std^2 I) on the
/// active slots, with the mean produced by an MLP.
struct GaussianPolicy {
    Mlp mean_net;
    EnvLayout layout;
    double action_std = 0.5;

    Eigen::MatrixXd mean(const EnvBatch& env, Mlp::Tape* tape = nullptr) const;
};

struct PgConfig {
    int epochs = 300;
    int steps_per_epoch = 4;
    int batch_size = 64;
    double lr = 1e-3;
    double action_std = 0.5;
    double baseline_decay = 0.9;  // moving-average reward baseline
    std::vector<int> hidden{128, 128};
    std::uint64_t seed = 0;

    void check() const;
};

/// REINFORCE surrogate -mean_b adv_b * log pi(a_b | e_b) and its gradient
/// w.r.t. the mean network parameters.
LossAndGrad pg_surrogate(const GaussianPolicy& policy, const EnvBatch& env, const Eigen::MatrixXd& actions,
                         const Eigen::VectorXd& advantages);

/// Mean per-round quality of the policy's mean action.
double evaluate_pg(const GaussianPolicy& policy, const Workload& workload);

struct PgResult {
    GaussianPolicy policy;
    std::vector<double> curve;  // evaluate_pg after each epoch
    std::size_t skipped_steps = 0;
};

GaussianPolicy make_gaussian_policy(const EnvLayout& layout, const PgConfig& config, std::mt19937_64& rng);

/// Contextual-bandit REINFORCE with a moving-average baseline.
PgResult pg_baseline_train(const Workload& workload, const PgConfig& config, const EnvLayout& layout);

}  // namespace semra
