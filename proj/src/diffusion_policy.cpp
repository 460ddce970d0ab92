// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/diffusion_policy.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace semra {

// ---------------------------------------------------------------------------
// Schedule

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
    if (betas_.empty()) throw std::invalid_argument("noise schedule: need at least one step");
    double prev = 0.0;
    double abar = 1.0;
    alpha_bars_.reserve(betas_.size());
    for (double b : betas_) {
        if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("noise schedule: betas must lie in (0, 1)");
        if (b < prev) throw std::invalid_argument("noise schedule: betas must be non-decreasing");
        prev = b;
        abar *= 1.0 - b;
        alpha_bars_.push_back(abar);
    }
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_min, double beta_max) {
    if (steps < 1) throw std::invalid_argument("noise schedule: T must be >= 1");
    if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
        throw std::invalid_argument("noise schedule: need 0 < beta_min <= beta_max < 1");
    }
    std::vector<double> betas(static_cast<std::size_t>(steps));
    if (steps == 1) {
        betas[0] = beta_max;
    } else {
        for (int i = 0; i < steps; ++i) {
            betas[static_cast<std::size_t>(i)] = beta_min + (beta_max - beta_min) * i / (steps - 1);
        }
    }
    return NoiseSchedule(std::move(betas));
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    return alpha_bars_.at(static_cast<std::size_t>(t - 1));
}

double NoiseSchedule::posterior_std(int t) const {
    const double var = (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
    return std::sqrt(var);
}

Eigen::VectorXd forward_noising(const Eigen::VectorXd& x0, int t, const NoiseSchedule& schedule,
                                const Eigen::VectorXd& noise) {
    if (t < 1 || t > schedule.steps()) {
        throw std::out_of_range("forward_noising: step " + std::to_string(t) + " outside [1, " +
                                std::to_string(schedule.steps()) + "]");
    }
    if (x0.size() != noise.size()) throw std::invalid_argument("forward_noising: size mismatch");
    const double ab = schedule.alpha_bar(t);
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Eigen::VectorXd timestep_embedding(int t, int dim) {
    Eigen::VectorXd e(dim);
    const int half = dim / 2;
    for (int k = 0; k < half; ++k) {
        const double freq = std::exp(-std::log(100.0) * k / std::max(1, half - 1));
        e[k] = std::sin(t * freq);
        e[half + k] = std::cos(t * freq);
    }
    if (dim % 2) e[dim - 1] = 0.0;
    return e;
}

// ---------------------------------------------------------------------------
// Networks

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

Eigen::MatrixXd fractions_of(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& active) {
    Eigen::MatrixXd f(logits.rows(), logits.cols());
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        masked_softmax(std::span<const double>(logits.col(b).data(), static_cast<std::size_t>(logits.rows())),
                       active[static_cast<std::size_t>(b)],
                       std::span<double>(f.col(b).data(), static_cast<std::size_t>(f.rows())));
    }
    return f;
}

// Floor inside the critic's log-fraction feature. The feature is bounded
// below by log10(kLogFloor) plus the link budget.
constexpr double kLogFloor = 1e-3;

// Per-slot link quality log10((f + floor) * budget * gain / noise) on active
// slots, zero on padding. The link-budget term is read back from the
// environment vector.
Eigen::MatrixXd slot_log_snr(const Eigen::MatrixXd& fractions, const EnvBatch& env, std::size_t n_max) {
    const auto link_row = EnvLayout{n_max}.link_budget_row();
    Eigen::MatrixXd lf = Eigen::MatrixXd::Zero(fractions.rows(), fractions.cols());
    for (Eigen::Index b = 0; b < fractions.cols(); ++b) {
        const auto n = static_cast<Eigen::Index>(env.active[static_cast<std::size_t>(b)]);
        lf.col(b).head(n) =
            ((fractions.col(b).head(n).array() + kLogFloor).log10() + env.features(link_row, b)).matrix();
    }
    return lf;
}

Eigen::MatrixXd critic_input(const ValueNet& critic, const EnvBatch& env, const Eigen::MatrixXd& fractions) {
    const auto nm = static_cast<Eigen::Index>(critic.n_max);
    Eigen::MatrixXd in(2 * nm + critic.env_dim, env.batch());
    in.topRows(nm) = fractions;
    in.middleRows(nm, nm) = slot_log_snr(fractions, env, critic.n_max);
    in.bottomRows(critic.env_dim) = env.features;
    return in;
}

void check_batch(const EnvBatch& env, const Eigen::MatrixXd& logits, std::size_t n_max, Eigen::Index env_dim) {
    if (env.features.rows() != env_dim) throw std::invalid_argument("environment dimension mismatch");
    if (logits.rows() != static_cast<Eigen::Index>(n_max) || logits.cols() != env.batch()) {
        throw std::invalid_argument("logits shape mismatch");
    }
}

}  // namespace

DenoiserNet DenoiserNet::create(std::size_t n_max, Eigen::Index env_dim, const std::vector<int>& hidden,
                                std::mt19937_64& rng, int time_dim) {
    DenoiserNet d;
    d.n_max = n_max;
    d.env_dim = env_dim;
    d.time_dim = time_dim;
    const int nm = static_cast<int>(n_max);
    d.net = Mlp(layer_sizes(nm + time_dim + static_cast<int>(env_dim), hidden, nm));
    d.net.init(rng);
    return d;
}

Eigen::MatrixXd DenoiserNet::predict(const Eigen::MatrixXd& x, int t, const Eigen::MatrixXd& env,
                                     Mlp::Tape* tape) const {
    const auto nm = static_cast<Eigen::Index>(n_max);
    if (x.rows() != nm || env.rows() != env_dim || x.cols() != env.cols()) {
        throw std::invalid_argument("denoiser: input dimension mismatch");
    }
    Eigen::MatrixXd in(nm + time_dim + env_dim, x.cols());
    in.topRows(nm) = x;
    in.middleRows(nm, time_dim) = timestep_embedding(t, time_dim).replicate(1, x.cols());
    in.bottomRows(env_dim) = env;
    return net.forward(in, tape);
}

ValueNet ValueNet::create(std::size_t n_max, Eigen::Index env_dim, const std::vector<int>& hidden,
                          std::mt19937_64& rng) {
    ValueNet v;
    v.n_max = n_max;
    v.env_dim = env_dim;
    v.net = Mlp(layer_sizes(2 * static_cast<int>(n_max) + static_cast<int>(env_dim), hidden, 1));
    v.net.init(rng);
    return v;
}

Eigen::VectorXd ValueNet::evaluate(const EnvBatch& env, const Eigen::MatrixXd& logits) const {
    check_batch(env, logits, n_max, env_dim);
    return net.forward(critic_input(*this, env, fractions_of(logits, env.active))).row(0).transpose();
}

Eigen::MatrixXd ValueNet::backward_logits(const EnvBatch& env, const Eigen::MatrixXd& logits,
                                          const Eigen::VectorXd& weights, Eigen::VectorXd* values,
                                          Eigen::VectorXd* grad_params) const {
    check_batch(env, logits, n_max, env_dim);
    const Eigen::MatrixXd f = fractions_of(logits, env.active);
    Mlp::Tape tape;
    const Eigen::MatrixXd q = net.forward(critic_input(*this, env, f), &tape);
    if (values) *values = q.row(0).transpose();

    Eigen::VectorXd scratch;
    Eigen::VectorXd& gp = grad_params ? *grad_params : scratch;
    const Eigen::MatrixXd d_in = net.backward(tape, weights.transpose(), gp);

    // Chain rule through l = log10(f + floor) + const into df, then the softmax
    // Jacobian dz_j = f_j (df_j - <f, df>).
    const auto nm = static_cast<Eigen::Index>(n_max);
    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(nm, logits.cols());
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        const auto n = static_cast<Eigen::Index>(env.active[static_cast<std::size_t>(b)]);
        const auto fb = f.col(b).head(n);
        const Eigen::VectorXd df =
            (d_in.col(b).head(n).array() + d_in.col(b).segment(nm, n).array() / ((fb.array() + kLogFloor) * std::numbers::ln10)).matrix();
        d_logits.col(b).head(n) = (fb.array() * (df.array() - fb.dot(df))).matrix();
    }
    return d_logits;
}

// ---------------------------------------------------------------------------
// Reverse chain

namespace {

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    }
    return m;
}

}  // namespace

Eigen::MatrixXd reverse_chain(const DenoiserNet& net, const NoiseSchedule& schedule, const EnvBatch& env,
                              std::mt19937_64& rng, ChainTape* tape) {
    if (env.features.rows() != net.env_dim) throw std::invalid_argument("reverse_chain: environment dimension mismatch");
    const int steps = schedule.steps();
    const auto nm = static_cast<Eigen::Index>(net.n_max);
    if (tape) tape->steps.assign(static_cast<std::size_t>(steps), {});

    Eigen::MatrixXd x = standard_normal(nm, env.batch(), rng);
    for (int t = steps; t >= 1; --t) {
        Mlp::Tape* step_tape = tape ? &tape->steps[static_cast<std::size_t>(t - 1)] : nullptr;
        const Eigen::MatrixXd eps = net.predict(x, t, env.features, step_tape);
        x = (x - schedule.eps_coef(t) * eps) / std::sqrt(schedule.alpha(t));
        if (t > 1) x += schedule.posterior_std(t) * standard_normal(nm, env.batch(), rng);
    }
    return x;
}

Eigen::VectorXd reverse_sample(const EnvironmentVector& env, const DenoiserNet& net,
                               const NoiseSchedule& schedule, std::uint64_t seed) {
    if (env.values.size() != net.env_dim) throw std::invalid_argument("reverse_sample: environment dimension mismatch");
    if (env.active > net.n_max) throw std::invalid_argument("reverse_sample: more triplets than N_max");
    EnvBatch batch;
    batch.features = env.values;
    batch.active = {env.active};
    std::mt19937_64 rng(seed);
    return reverse_chain(net, schedule, batch, rng).col(0);
}

Eigen::VectorXd chain_backward(const DenoiserNet& net, const NoiseSchedule& schedule, const ChainTape& tape,
                               const Eigen::MatrixXd& grad_x0) {
    const int steps = schedule.steps();
    if (static_cast<int>(tape.steps.size()) != steps) throw std::invalid_argument("chain_backward: tape length mismatch");
    const auto nm = static_cast<Eigen::Index>(net.n_max);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.net.num_params()));
    Eigen::MatrixXd g = grad_x0;  // d objective / d x_{t-1}
    for (int t = 1; t <= steps; ++t) {
        const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
        const Eigen::MatrixXd d_eps = (-schedule.eps_coef(t) * inv_sqrt_alpha) * g;
        const Eigen::MatrixXd d_in = net.net.backward(tape.steps[static_cast<std::size_t>(t - 1)], d_eps, grad);
        g = inv_sqrt_alpha * g + d_in.topRows(nm);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Losses and steps

LossAndGrad critic_loss(const ValueNet& critic, const CriticSample& batch) {
    const Eigen::Index n = batch.env.batch();
    if (n == 0) throw std::invalid_argument("critic_loss: empty batch");
    if (batch.rewards.size() != n) throw std::invalid_argument("critic_loss: reward count mismatch");
    check_batch(batch.env, batch.logits, critic.n_max, critic.env_dim);

    Mlp::Tape tape;
    const Eigen::MatrixXd q =
        critic.net.forward(critic_input(critic, batch.env, fractions_of(batch.logits, batch.env.active)), &tape);
    const Eigen::VectorXd residual = q.row(0).transpose() - batch.rewards;
    LossAndGrad out;
    out.value = residual.squaredNorm() / static_cast<double>(n);
    out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(critic.net.num_params()));
    critic.net.backward(tape, (2.0 / static_cast<double>(n)) * residual.transpose(), out.grad);
    return out;
}

namespace {

LossAndGrad actor_objective_from_tape(const DenoiserNet& denoiser, const ValueNet& critic,
                                      const NoiseSchedule& schedule, const EnvBatch& env,
                                      const Eigen::MatrixXd& x0, const ChainTape& tape, double logit_penalty) {
    const Eigen::Index n = env.batch();
    const double w = 1.0 / static_cast<double>(n);
    Eigen::VectorXd values;
    Eigen::MatrixXd d_x0 = critic.backward_logits(env, x0, Eigen::VectorXd::Constant(n, w), &values);
    d_x0 -= (2.0 * logit_penalty * w) * x0;
    LossAndGrad out;
    out.value = values.mean() - logit_penalty * w * x0.squaredNorm();
    out.grad = chain_backward(denoiser, schedule, tape, d_x0);
    return out;
}

}  // namespace

LossAndGrad actor_objective(const DenoiserNet& denoiser, const ValueNet& critic, const NoiseSchedule& schedule,
                            const EnvBatch& env, std::uint64_t noise_seed, double logit_penalty) {
    if (env.batch() == 0) throw std::invalid_argument("actor_objective: empty batch");
    std::mt19937_64 rng(noise_seed);
    ChainTape tape;
    const Eigen::MatrixXd x0 = reverse_chain(denoiser, schedule, env, rng, &tape);
    return actor_objective_from_tape(denoiser, critic, schedule, env, x0, tape, logit_penalty);
}

ActorStepResult actor_step(DenoiserNet& denoiser, Adam& optimizer, const ValueNet& critic,
                           const NoiseSchedule& schedule, const EnvBatch& env, std::uint64_t noise_seed,
                           double logit_penalty) {
    const auto obj = actor_objective(denoiser, critic, schedule, env, noise_seed, logit_penalty);
    ActorStepResult res;
    res.objective = obj.value;
    res.applied = optimizer.step(denoiser.net.params(), -obj.grad);
    return res;
}

// ---------------------------------------------------------------------------
// Training

namespace {

/// FIFO pool of scored (environment, action, reward) tuples. Once full, each
/// add overwrites the oldest entries.
class RewardPool {
public:
    RewardPool(std::size_t capacity, Eigen::Index env_dim, Eigen::Index n_max)
        : capacity_(capacity), env_(env_dim, static_cast<Eigen::Index>(capacity)),
          logits_(n_max, static_cast<Eigen::Index>(capacity)), rewards_(static_cast<Eigen::Index>(capacity)),
          active_(capacity) {}

    void add(const CriticSample& s) {
        for (Eigen::Index c = 0; c < s.env.batch(); ++c) {
            const auto slot = static_cast<Eigen::Index>(next_);
            env_.col(slot) = s.env.features.col(c);
            logits_.col(slot) = s.logits.col(c);
            rewards_[slot] = s.rewards[c];
            active_[next_] = s.env.active[static_cast<std::size_t>(c)];
            next_ = (next_ + 1) % capacity_;
            size_ = std::min(size_ + 1, capacity_);
        }
    }

    CriticSample draw(std::size_t count, std::mt19937_64& rng) const {
        std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
        CriticSample out;
        const auto n = static_cast<Eigen::Index>(count);
        out.env.features.resize(env_.rows(), n);
        out.logits.resize(logits_.rows(), n);
        out.rewards.resize(n);
        out.env.active.resize(count);
        for (Eigen::Index c = 0; c < n; ++c) {
            const std::size_t i = pick(rng);
            const auto src = static_cast<Eigen::Index>(i);
            out.env.features.col(c) = env_.col(src);
            out.logits.col(c) = logits_.col(src);
            out.rewards[c] = rewards_[src];
            out.env.active[static_cast<std::size_t>(c)] = active_[i];
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::size_t size_ = 0;
    Eigen::MatrixXd env_;
    Eigen::MatrixXd logits_;
    Eigen::VectorXd rewards_;
    std::vector<std::size_t> active_;
};

}  // namespace

void TrainConfig::check() const {
    if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (steps_per_epoch < 1 || batch_size < 1 || critic_samples < 1 || critic_updates < 1) {
        throw std::invalid_argument("train: step, batch and sample counts must be >= 1");
    }
    if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw std::invalid_argument("train: learning rates must be >= 0");
    if (!(exploration_std >= 0.0) || !(exploration_final >= 0.0)) {
        throw std::invalid_argument("train: exploration std must be >= 0");
    }
    if (denoising_steps < 1) throw std::invalid_argument("train: T must be >= 1");
    if (replay_capacity < 0 || broad_samples < 0 || critic_batch < 1) {
        throw std::invalid_argument("train: replay_capacity, broad_samples >= 0 and critic_batch >= 1 required");
    }
}

DiffusionPolicy make_policy(const EnvLayout& layout, const TrainConfig& config, std::mt19937_64& rng) {
    DiffusionPolicy p;
    p.layout = layout;
    p.schedule = NoiseSchedule::linear(config.denoising_steps, config.beta_min, config.beta_max);
    p.denoiser = DenoiserNet::create(layout.n_max, layout.dim(), config.denoiser_hidden, rng);
    p.critic = ValueNet::create(layout.n_max, layout.dim(), config.critic_hidden, rng);
    return p;
}

std::vector<double> scenario_qualities(const DiffusionPolicy& policy, std::span<const Scenario> scenarios,
                                       std::uint64_t seed) {
    const EnvBatch env = make_env_batch(scenarios, policy.layout);
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd x0 = reverse_chain(policy.denoiser, policy.schedule, env, rng);
    std::vector<double> q(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto col = x0.col(static_cast<Eigen::Index>(i));
        q[i] = scenarios[i].quality_of_logits(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    }
    return q;
}

double evaluate_policy(const DiffusionPolicy& policy, const Workload& workload, std::uint64_t seed) {
    if (workload.scenarios.empty()) throw std::invalid_argument("evaluate_policy: empty workload");
    const auto q = scenario_qualities(policy, workload.scenarios, seed);
    double sum = 0.0;
    for (double v : q) sum += v;
    return static_cast<double>(workload.users) * sum / static_cast<double>(q.size());
}

TrainResult train(const Workload& workload, const TrainConfig& config, const EnvLayout& layout,
                  const EpochCallback& on_epoch) {
    config.check();
    if (workload.scenarios.empty()) throw std::invalid_argument("train: empty workload");

    std::mt19937_64 rng(config.seed);
    TrainResult result;
    result.policy = make_policy(layout, config, rng);
    auto& policy = result.policy;
    Adam actor_opt(policy.denoiser.net.num_params(), config.actor_lr);
    Adam critic_opt(policy.critic.net.num_params(), config.critic_lr);

    std::uniform_int_distribution<std::size_t> pick(0, workload.scenarios.size() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto nm = static_cast<Eigen::Index>(layout.n_max);
    const int samples = config.critic_samples;
    std::optional<RewardPool> pool;
    if (config.replay_capacity > 0) {
        pool.emplace(static_cast<std::size_t>(config.replay_capacity), layout.dim(), nm);
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double frac = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 0.0;
        const double explore = config.exploration_std + (config.exploration_final - config.exploration_std) * frac;

        EpochStats stats;
        stats.epoch = epoch;
        for (int step = 0; step < config.steps_per_epoch; ++step) {
            std::vector<const Scenario*> picked(static_cast<std::size_t>(config.batch_size));
            for (auto& p : picked) p = &workload.scenarios[pick(rng)];
            const EnvBatch env = make_env_batch(picked, layout);

            ChainTape tape;
            const Eigen::MatrixXd x0 = reverse_chain(policy.denoiser, policy.schedule, env, rng, &tape);

            // Exploratory actions around the sampled logits, scored by the
            // true quality metric.
            CriticSample cs;
            const int total = samples + config.broad_samples;
            cs.env.features = env.features.replicate(1, total);
            cs.env.active.reserve(picked.size() * static_cast<std::size_t>(total));
            cs.logits.resize(nm, env.batch() * total);
            cs.rewards.resize(env.batch() * total);
            for (int k = 0; k < total; ++k) {
                const bool broad = k >= samples;
                for (Eigen::Index b = 0; b < env.batch(); ++b) {
                    const Eigen::Index c = k * env.batch() + b;
                    for (Eigen::Index r = 0; r < nm; ++r) {
                        cs.logits(r, c) = broad ? config.broad_std * normal(rng) : x0(r, b) + explore * normal(rng);
                    }
                    const auto* s = picked[static_cast<std::size_t>(b)];
                    cs.env.active.push_back(s->size());
                    cs.rewards[c] = s->quality_of_logits(
                        std::span<const double>(cs.logits.col(c).data(), static_cast<std::size_t>(nm)));
                }
            }

            for (Eigen::Index b = 0; b < env.batch(); ++b) {
                stats.sampled_reward += picked[static_cast<std::size_t>(b)]->quality_of_logits(
                    std::span<const double>(x0.col(b).data(), static_cast<std::size_t>(nm)));
            }

            if (pool) pool->add(cs);
            for (int u = 0; u < config.critic_updates; ++u) {
                const auto closs =
                    critic_loss(policy.critic, pool ? pool->draw(static_cast<std::size_t>(config.critic_batch), rng) : cs);
                if (u == 0) stats.critic_loss += closs.value;
                if (!critic_opt.step(policy.critic.net.params(), closs.grad)) ++result.skipped_steps;
            }

            const auto obj = actor_objective_from_tape(policy.denoiser, policy.critic, policy.schedule, env, x0, tape,
                                                       config.logit_penalty);
            stats.actor_objective += obj.value;
            if (!actor_opt.step(policy.denoiser.net.params(), -obj.grad)) ++result.skipped_steps;
        }
        result.curve.push_back(evaluate_policy(policy, workload, config.eval_seed));
        if (on_epoch) {
            const double steps = config.steps_per_epoch;
            stats.critic_loss /= steps;
            stats.actor_objective /= steps;
            stats.sampled_reward /= steps * config.batch_size;
            stats.quality = result.curve.back();
            on_epoch(stats);
        }
    }
    return result;
}

TrainResult train(const Corpus& corpus, Budget budget, std::span<const ChannelParams> users,
                  const CodingParams& coding, const TrainConfig& config) {
    const Workload w = make_workload(corpus, users, coding, budget.total_power());
    EnvLayout layout;
    layout.n_max = std::max<std::size_t>(layout.n_max, corpus.max_triplets());
    return train(w, config, layout);
}

}  // namespace semra
