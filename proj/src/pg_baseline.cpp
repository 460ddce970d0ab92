// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/pg_baseline.hpp"

#include <stdexcept>

namespace semra {

Eigen::MatrixXd GaussianPolicy::mean(const EnvBatch& env, Mlp::Tape* tape) const {
    return mean_net.forward(env.features, tape);
}

void PgConfig::check() const {
    if (epochs < 0) throw std::invalid_argument("pg: epochs must be >= 0");
    if (steps_per_epoch < 1 || batch_size < 1) throw std::invalid_argument("pg: step and batch counts must be >= 1");
    if (!(lr >= 0.0)) throw std::invalid_argument("pg: learning rate must be >= 0");
    if (!(action_std > 0.0)) throw std::invalid_argument("pg: action std must be > 0");
    if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw std::invalid_argument("pg: baseline decay in [0, 1)");
}

GaussianPolicy make_gaussian_policy(const EnvLayout& layout, const PgConfig& config, std::mt19937_64& rng) {
    GaussianPolicy p;
    p.layout = layout;
    p.action_std = config.action_std;
    std::vector<int> sizes{static_cast<int>(layout.dim())};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(static_cast<int>(layout.n_max));
    p.mean_net = Mlp(sizes);
    p.mean_net.init(rng);
    return p;
}

LossAndGrad pg_surrogate(const GaussianPolicy& policy, const EnvBatch& env, const Eigen::MatrixXd& actions,
                         const Eigen::VectorXd& advantages) {
    const Eigen::Index n = env.batch();
    if (n == 0) throw std::invalid_argument("pg_surrogate: empty batch");
    if (actions.cols() != n || advantages.size() != n || actions.rows() != policy.mean_net.output_size()) {
        throw std::invalid_argument("pg_surrogate: shape mismatch");
    }
    Mlp::Tape tape;
    const Eigen::MatrixXd mu = policy.mean(env, &tape);
    const double var = policy.action_std * policy.action_std;

    LossAndGrad out;
    Eigen::MatrixXd d_mu = Eigen::MatrixXd::Zero(mu.rows(), n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const auto k = static_cast<Eigen::Index>(env.active[static_cast<std::size_t>(b)]);
        const Eigen::VectorXd diff = actions.col(b).head(k) - mu.col(b).head(k);
        // log pi up to a constant that does not depend on the parameters.
        const double log_pi = -0.5 * diff.squaredNorm() / var;
        out.value -= advantages[b] * log_pi / static_cast<double>(n);
        d_mu.col(b).head(k) = -(advantages[b] / static_cast<double>(n)) * diff / var;
    }
    out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(policy.mean_net.num_params()));
    policy.mean_net.backward(tape, d_mu, out.grad);
    return out;
}

double evaluate_pg(const GaussianPolicy& policy, const Workload& workload) {
    if (workload.scenarios.empty()) throw std::invalid_argument("evaluate_pg: empty workload");
    const EnvBatch env = make_env_batch(workload.scenarios, policy.layout);
    const Eigen::MatrixXd mu = policy.mean(env);
    double sum = 0.0;
    for (std::size_t i = 0; i < workload.scenarios.size(); ++i) {
        const auto col = mu.col(static_cast<Eigen::Index>(i));
        sum += workload.scenarios[i].quality_of_logits(
            std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    }
    return static_cast<double>(workload.users) * sum / static_cast<double>(workload.scenarios.size());
}

PgResult pg_baseline_train(const Workload& workload, const PgConfig& config, const EnvLayout& layout) {
    config.check();
    if (workload.scenarios.empty()) throw std::invalid_argument("pg_baseline_train: empty workload");
    std::mt19937_64 rng(config.seed);
    PgResult result;
    result.policy = make_gaussian_policy(layout, config, rng);
    auto& policy = result.policy;
    Adam opt(policy.mean_net.num_params(), config.lr);

    std::uniform_int_distribution<std::size_t> pick(0, workload.scenarios.size() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto nm = static_cast<Eigen::Index>(layout.n_max);
    bool have_baseline = false;
    double baseline = 0.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (int step = 0; step < config.steps_per_epoch; ++step) {
            std::vector<const Scenario*> picked(static_cast<std::size_t>(config.batch_size));
            for (auto& p : picked) p = &workload.scenarios[pick(rng)];
            const EnvBatch env = make_env_batch(picked, layout);
            const Eigen::MatrixXd mu = policy.mean(env);

            Eigen::MatrixXd actions(nm, env.batch());
            Eigen::VectorXd rewards(env.batch());
            for (Eigen::Index b = 0; b < env.batch(); ++b) {
                for (Eigen::Index r = 0; r < nm; ++r) actions(r, b) = mu(r, b) + policy.action_std * normal(rng);
                rewards[b] = picked[static_cast<std::size_t>(b)]->quality_of_logits(
                    std::span<const double>(actions.col(b).data(), static_cast<std::size_t>(nm)));
            }
            if (!have_baseline) {
                baseline = rewards.mean();
                have_baseline = true;
            }
            const Eigen::VectorXd adv = rewards.array() - baseline;
            const auto sur = pg_surrogate(policy, env, actions, adv);
            if (!opt.step(policy.mean_net.params(), sur.grad)) ++result.skipped_steps;
            baseline = config.baseline_decay * baseline + (1.0 - config.baseline_decay) * rewards.mean();
        }
        result.curve.push_back(evaluate_pg(policy, workload));
    }
    return result;
}

}  // namespace semra
