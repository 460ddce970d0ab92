// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "semra/allocator.hpp"
#include "semra/environment.hpp"
#include "semra/mlp.hpp"

namespace semra {

/// Variance schedule of the forward (noising) process, indexed t = 1..T.
class NoiseSchedule {
public:
    NoiseSchedule() = default;
    explicit NoiseSchedule(std::vector<double> betas);

    /// Betas spaced linearly from beta_min (t = 1) to beta_max (t = T).
    static NoiseSchedule linear(int steps, double beta_min = 1e-4, double beta_max = 0.2);

    int steps() const { return static_cast<int>(betas_.size()); }
    double beta(int t) const { return betas_.at(static_cast<std::size_t>(t - 1)); }
    double alpha(int t) const { return 1.0 - beta(t); }
    double alpha_bar(int t) const;  // alpha_bar(0) == 1
    /// Standard deviation of the ancestral noise added when stepping t -> t-1
    /// (posterior variance of the forward process; zero at t = 1).
    double posterior_std(int t) const;
    /// Coefficient on the predicted noise in the reverse mean.
    double eps_coef(int t) const { return beta(t) / std::sqrt(1.0 - alpha_bar(t)); }

    const std::vector<double>& betas() const { return betas_; }

private:
    std::vector<double> betas_;
    std::vector<double> alpha_bars_;
};

/// Closed-form forward marginal sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.
Eigen::VectorXd forward_noising(const Eigen::VectorXd& x0, int t, const NoiseSchedule& schedule,
                                const Eigen::VectorXd& noise);

/// Sinusoidal embedding of the denoising step index.
Eigen::VectorXd timestep_embedding(int t, int dim);

/// Noise predictor eps_theta(x_t, t, e). Input layout: [x_t, embed(t), e].
struct DenoiserNet {
    Mlp net;
    std::size_t n_max = 0;
    Eigen::Index env_dim = 0;
    int time_dim = 16;

    static DenoiserNet create(std::size_t n_max, Eigen::Index env_dim, const std::vector<int>& hidden,
                              std::mt19937_64& rng, int time_dim = 16);

    Eigen::MatrixXd predict(const Eigen::MatrixXd& x, int t, const Eigen::MatrixXd& env,
                            Mlp::Tape* tape = nullptr) const;
};

/// Critic Q_nu(e, x0). The logits enter through the masked softmax: the
/// network input is [f, s, e] where s_j = log10((f_j + 1e-3) * budget * gain / noise)
/// is the per-slot link quality; padding slots are zero.
struct ValueNet {
    Mlp net;
    std::size_t n_max = 0;
    Eigen::Index env_dim = 0;

    static ValueNet create(std::size_t n_max, Eigen::Index env_dim, const std::vector<int>& hidden,
                           std::mt19937_64& rng);

    Eigen::VectorXd evaluate(const EnvBatch& env, const Eigen::MatrixXd& logits) const;

    /// Values plus d(sum_b weight_b * Q_b)/d logits; parameter gradients are
    /// accumulated into `grad_params` when given.
    Eigen::MatrixXd backward_logits(const EnvBatch& env, const Eigen::MatrixXd& logits,
                                    const Eigen::VectorXd& weights, Eigen::VectorXd* values,
                                    Eigen::VectorXd* grad_params = nullptr) const;
};

/// Per-step activations of one reverse chain pass.
struct ChainTape {
    std::vector<Mlp::Tape> steps;  // steps[t - 1]
};

/// Runs the reverse chain for a batch: x_T ~ N(0, I), then T ancestral
/// updates. Returns x0 logits (n_max x batch).
Eigen::MatrixXd reverse_chain(const DenoiserNet& net, const NoiseSchedule& schedule, const EnvBatch& env,
                              std::mt19937_64& rng, ChainTape* tape = nullptr);

/// Single-environment sampler. Deterministic per seed.
Eigen::VectorXd reverse_sample(const EnvironmentVector& env, const DenoiserNet& net,
                               const NoiseSchedule& schedule, std::uint64_t seed);

/// Backpropagates d objective / d x0 through the whole chain and returns the
/// gradient w.r.t. the denoiser parameters.
Eigen::VectorXd chain_backward(const DenoiserNet& net, const NoiseSchedule& schedule, const ChainTape& tape,
                               const Eigen::MatrixXd& grad_x0);

struct CriticSample {
    EnvBatch env;
    Eigen::MatrixXd logits;
    Eigen::VectorXd rewards;
};

struct LossAndGrad {
    double value = 0.0;
    Eigen::VectorXd grad;
};

/// Mean squared error of Q_nu against one-step rewards, with its gradient.
LossAndGrad critic_loss(const ValueNet& critic, const CriticSample& batch);

/// mean_b [Q_nu(e_b, x0_b) - logit_penalty * |x0_b|^2] with x0 = reverse_chain(e; theta),
/// and its gradient w.r.t. theta.
LossAndGrad actor_objective(const DenoiserNet& denoiser, const ValueNet& critic, const NoiseSchedule& schedule,
                            const EnvBatch& env, std::uint64_t noise_seed, double logit_penalty = 0.0);

struct ActorStepResult {
    bool applied = false;
    double objective = 0.0;
};

/// One ascent step on actor_objective. Non-finite gradients skip the step.
ActorStepResult actor_step(DenoiserNet& denoiser, Adam& optimizer, const ValueNet& critic,
                           const NoiseSchedule& schedule, const EnvBatch& env, std::uint64_t noise_seed,
                           double logit_penalty = 0.0);

struct TrainConfig {
    int epochs = 300;
    int steps_per_epoch = 4;
    int batch_size = 64;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double exploration_std = 0.1;    // on the final logits, epoch 0
    double exploration_final = 0.0;  // linear decay target at the last epoch
    int critic_samples = 4;          // exploratory actions per environment
    int critic_updates = 4;          // critic steps per actor step
    int broad_samples = 0;           // extra critic actions with logits ~ N(0, broad_std^2)
    double broad_std = 2.0;
    double logit_penalty = 1e-3;     // L2 weight on sampled logits in the actor objective
    int replay_capacity = 20000;     // critic regression pool; 0 = fresh samples only
    int critic_batch = 256;          // minibatch drawn from the pool per critic update
    int denoising_steps = 12;
    double beta_min = 1e-4;
    double beta_max = 0.2;
    std::vector<int> denoiser_hidden{128, 128, 128};
    std::vector<int> critic_hidden{128, 128};
    std::uint64_t seed = 0;
    std::uint64_t eval_seed = 12345;

    void check() const;
};

struct DiffusionPolicy {
    DenoiserNet denoiser;
    ValueNet critic;
    NoiseSchedule schedule;
    EnvLayout layout;
};

struct TrainResult {
    DiffusionPolicy policy;
    std::vector<double> curve;  // mean per-round quality after each epoch
    std::size_t skipped_steps = 0;
};

DiffusionPolicy make_policy(const EnvLayout& layout, const TrainConfig& config, std::mt19937_64& rng);

/// Samples one allocation per scenario with a fixed seed and returns the
/// mean per-round quality (users x mean scenario quality).
double evaluate_policy(const DiffusionPolicy& policy, const Workload& workload, std::uint64_t seed);

/// Per-scenario qualities of evaluate_policy.
std::vector<double> scenario_qualities(const DiffusionPolicy& policy, std::span<const Scenario> scenarios,
                                       std::uint64_t seed);

struct EpochStats {
    int epoch = 0;
    double critic_loss = 0.0;      // mean over the epoch's steps
    double actor_objective = 0.0;  // mean Q of sampled actions
    double sampled_reward = 0.0;   // mean true quality of the sampled actions
    double quality = 0.0;          // curve value
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Contextual-bandit actor-critic training of the diffusion policy.
TrainResult train(const Workload& workload, const TrainConfig& config, const EnvLayout& layout,
                  const EpochCallback& on_epoch = {});

TrainResult train(const Corpus& corpus, Budget budget, std::span<const ChannelParams> users,
                  const CodingParams& coding, const TrainConfig& config);

}  // namespace semra
