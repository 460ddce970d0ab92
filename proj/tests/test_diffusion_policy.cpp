// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "semra/diffusion_policy.hpp"

using namespace semra;
using semra::testing::check_gradient;

namespace {

Scenario scenario(std::vector<double> imps, double gain, double budget) {
    ChannelParams chan;
    chan.pathloss_gain = gain;
    return {std::move(imps), chan, CodingParams{}, budget};
}

EnvBatch small_batch(const EnvLayout& layout) {
    std::vector<Scenario> s{scenario({0.9, 0.4, 0.1}, 3e-7, 500.0), scenario({0.5, 0.5}, 1e-6, 300.0),
                            scenario({0.2, 0.8, 0.6, 0.3}, 1e-7, 700.0)};
    return make_env_batch(s, layout);
}

}  // namespace

TEST_CASE("linear schedule endpoints and cumulative products") {
    const auto s = NoiseSchedule::linear(12);
    CHECK(s.steps() == 12);
    CHECK(s.beta(1) == doctest::Approx(1e-4));
    CHECK(s.beta(12) == doctest::Approx(0.2));
    CHECK(s.alpha_bar(0) == 1.0);
    for (int t = 1; t <= 12; ++t) {
        CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
        CHECK(s.alpha_bar(t) == doctest::Approx(s.alpha_bar(t - 1) * s.alpha(t)));
    }
    CHECK(s.posterior_std(1) == 0.0);
    CHECK(NoiseSchedule::linear(1).steps() == 1);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS(NoiseSchedule(std::vector<double>{}));
    CHECK_THROWS(NoiseSchedule(std::vector<double>{0.1, 0.05}));
    CHECK_THROWS(NoiseSchedule(std::vector<double>{0.0, 0.1}));
    CHECK_THROWS(NoiseSchedule(std::vector<double>{0.1, 1.0}));
    CHECK_THROWS(NoiseSchedule::linear(0));
}

TEST_CASE("forward noising limits and range checks") {
    const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
    const Eigen::VectorXd noise = Eigen::VectorXd::Constant(4, 0.3);

    // Nearly noise-free schedule: output stays at x0.
    const NoiseSchedule tiny(std::vector<double>{1e-12});
    CHECK((forward_noising(x0, 1, tiny, noise) - x0).norm() < 1e-5);

    // Nearly pure-noise schedule: output is the noise.
    const NoiseSchedule heavy(std::vector<double>(60, 0.5));
    CHECK((forward_noising(x0, 60, heavy, noise) - noise).norm() < 1e-8);

    const auto s = NoiseSchedule::linear(6);
    const Eigen::VectorXd xt = forward_noising(x0, 3, s, noise);
    const Eigen::VectorXd expect = std::sqrt(s.alpha_bar(3)) * x0 + std::sqrt(1.0 - s.alpha_bar(3)) * noise;
    CHECK((xt - expect).norm() < 1e-14);
    CHECK_THROWS_AS(forward_noising(x0, 0, s, noise), std::out_of_range);
    CHECK_THROWS_AS(forward_noising(x0, 7, s, noise), std::out_of_range);
}

TEST_CASE("timestep embeddings are bounded and distinct") {
    for (int t = 1; t <= 20; ++t) {
        const auto e = timestep_embedding(t, 16);
        CHECK(e.size() == 16);
        CHECK(e.cwiseAbs().maxCoeff() <= 1.0);
        CHECK((e - timestep_embedding(t + 1, 16)).norm() > 1e-3);
    }
}

TEST_CASE("zero-weight denoiser reproduces the linear-Gaussian chain") {
    const EnvLayout layout;
    std::mt19937_64 rng(1);
    auto net = DenoiserNet::create(layout.n_max, layout.dim(), {8}, rng);
    net.net.params().setZero();
    const auto s = NoiseSchedule::linear(12);

    // x_{t-1} = x_t / sqrt(alpha_t) + std_t z, so v_{t-1} = v_t / alpha_t + std_t^2.
    double var = 1.0;
    for (int t = s.steps(); t >= 1; --t) var = var / s.alpha(t) + s.posterior_std(t) * s.posterior_std(t);

    const int n = 10000;
    EnvBatch env;
    env.features = Eigen::MatrixXd::Zero(layout.dim(), n);
    env.active.assign(n, layout.n_max);
    std::mt19937_64 noise(42);
    const Eigen::MatrixXd x0 = reverse_chain(net, s, env, noise);
    const Eigen::VectorXd first = x0.row(0).transpose();
    const double mean = first.mean();
    const double sample_var = (first.array() - mean).square().sum() / (n - 1);
    CHECK(std::abs(mean) < 3.0 * std::sqrt(var / n));
    // Sample variance of n normals has standard error var * sqrt(2 / (n - 1)).
    CHECK(std::abs(sample_var - var) < 4.0 * var * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("reverse_sample is deterministic per seed and respects dimensions") {
    const EnvLayout layout;
    std::mt19937_64 rng(3);
    const auto net = DenoiserNet::create(layout.n_max, layout.dim(), {16, 16}, rng);
    const auto s = NoiseSchedule::linear(6);
    const auto env = encode_environment(scenario({0.7, 0.2}, 5e-7, 400.0), layout);
    const auto a = reverse_sample(env, net, s, 9);
    CHECK(a.size() == static_cast<Eigen::Index>(layout.n_max));
    CHECK(a == reverse_sample(env, net, s, 9));
    CHECK(a != reverse_sample(env, net, s, 10));
    EnvironmentVector bad = env;
    bad.values.conservativeResize(env.values.size() - 1);
    CHECK_THROWS(reverse_sample(bad, net, s, 9));
}

TEST_CASE("one-step chain applies exactly one update") {
    const EnvLayout layout;
    std::mt19937_64 rng(4);
    const auto net = DenoiserNet::create(layout.n_max, layout.dim(), {16}, rng);
    const auto s = NoiseSchedule::linear(1);
    const auto env = encode_environment(scenario({0.7, 0.2}, 5e-7, 400.0), layout);

    std::mt19937_64 noise(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd xT(layout.n_max, 1);
    for (Eigen::Index r = 0; r < xT.rows(); ++r) xT(r, 0) = normal(noise);
    const Eigen::MatrixXd eps = net.predict(xT, 1, env.values);
    const Eigen::VectorXd expect = ((xT - s.eps_coef(1) * eps) / std::sqrt(s.alpha(1))).col(0);
    CHECK((reverse_sample(env, net, s, 5) - expect).norm() < 1e-12);
}

TEST_CASE("critic loss arithmetic") {
    const EnvLayout layout;
    std::mt19937_64 rng(6);
    auto critic = ValueNet::create(layout.n_max, layout.dim(), {4}, rng);
    critic.net.params().setZero();
    CriticSample one;
    one.env = make_env_batch(std::vector<Scenario>{scenario({0.5}, 1e-7, 100.0)}, layout);
    one.logits = Eigen::MatrixXd::Zero(layout.n_max, 1);
    one.rewards = Eigen::VectorXd::Constant(1, 2.0);
    CHECK(critic_loss(critic, one).value == doctest::Approx(4.0));
    one.rewards[0] = 0.0;
    CHECK(critic_loss(critic, one).value == 0.0);
    CHECK_THROWS(critic_loss(critic, CriticSample{}));
}

TEST_CASE("critic gradients match finite differences") {
    const EnvLayout layout;
    const EnvBatch env = small_batch(layout);
    std::mt19937_64 rng(7);
    auto critic = ValueNet::create(layout.n_max, layout.dim(), {6, 5}, rng);
    CriticSample sample{env, Eigen::MatrixXd::Random(layout.n_max, env.batch()), Eigen::Vector3d(0.4, 1.1, 0.7)};

    const auto lg = critic_loss(critic, sample);
    auto& p = critic.net.params();
    auto rep = check_gradient([&](const Eigen::VectorXd&) { return critic_loss(critic, sample).value; }, p, lg.grad,
                              60, 1);
    CHECK(rep.failed == 0);

    // d(sum_b w_b Q_b)/d logits, through the masked softmax and log-SNR features.
    const Eigen::VectorXd w = Eigen::Vector3d(0.5, -1.0, 2.0);
    Eigen::VectorXd values;
    const Eigen::MatrixXd dz = critic.backward_logits(env, sample.logits, w, &values);
    Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(sample.logits.data(), sample.logits.size());
    const Eigen::VectorXd analytic = Eigen::Map<const Eigen::VectorXd>(dz.data(), dz.size());
    rep = check_gradient(
        [&](const Eigen::VectorXd& z) {
            const Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(z.data(), dz.rows(), dz.cols());
            return critic.evaluate(env, m).dot(w);
        },
        flat, analytic, 24, 2);
    CHECK(rep.failed == 0);
    // Padding slots carry no gradient.
    CHECK(dz.col(1).tail(layout.n_max - 2).norm() == 0.0);
}

TEST_CASE("actor gradient through the full chain matches finite differences") {
    const EnvLayout layout;
    const EnvBatch env = small_batch(layout);
    std::mt19937_64 rng(8);
    TrainConfig cfg;
    cfg.denoiser_hidden = {6, 6};
    cfg.critic_hidden = {5};
    cfg.denoising_steps = 6;
    auto policy = make_policy(layout, cfg, rng);

    const auto obj = actor_objective(policy.denoiser, policy.critic, policy.schedule, env, 17, 1e-3);
    auto& p = policy.denoiser.net.params();
    const auto rep = check_gradient(
        [&](const Eigen::VectorXd&) {
            return actor_objective(policy.denoiser, policy.critic, policy.schedule, env, 17, 1e-3).value;
        },
        p, obj.grad, 60, 3);
    CHECK(rep.failed == 0);
}

TEST_CASE("constant critic yields a zero actor gradient") {
    const EnvLayout layout;
    const EnvBatch env = small_batch(layout);
    std::mt19937_64 rng(9);
    TrainConfig cfg;
    cfg.denoiser_hidden = {8};
    cfg.critic_hidden = {4};
    auto policy = make_policy(layout, cfg, rng);
    auto& cp = policy.critic.net.params();
    cp.setZero();
    cp[cp.size() - 1] = 3.0;  // output bias
    const auto obj = actor_objective(policy.denoiser, policy.critic, policy.schedule, env, 1);
    CHECK(obj.value == doctest::Approx(3.0));
    CHECK(obj.grad.norm() == 0.0);
}

TEST_CASE("chain gradient ascent on a quadratic reaches its optimum") {
    const EnvLayout layout;
    const EnvBatch env = make_env_batch(std::vector<Scenario>{scenario({0.6, 0.3, 0.1}, 2e-7, 500.0)}, layout);
    std::mt19937_64 rng(10);
    auto net = DenoiserNet::create(layout.n_max, layout.dim(), {32, 32}, rng);
    const auto s = NoiseSchedule::linear(6);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(layout.n_max);
    target.head(3) << 2.0, -1.0, 0.5;

    // Objective -|x0 - x*|^2 averaged over a batch of chain noise draws.
    const int draws = 32;
    const EnvBatch rep_env{env.features.replicate(1, draws), std::vector<std::size_t>(draws, 3)};
    auto distance = [&](std::uint64_t seed) {
        std::mt19937_64 r(seed);
        const Eigen::MatrixXd x0 = reverse_chain(net, s, rep_env, r);
        return (x0.colwise() - target).colwise().norm().mean();
    };
    const double before = distance(999);
    Adam opt(net.net.num_params(), 3e-3);
    for (int it = 0; it < 400; ++it) {
        std::mt19937_64 r(static_cast<std::uint64_t>(it));
        ChainTape tape;
        const Eigen::MatrixXd x0 = reverse_chain(net, s, rep_env, r, &tape);
        const Eigen::MatrixXd ascent = -2.0 / draws * (x0.colwise() - target);
        opt.step(net.net.params(), -chain_backward(net, s, tape, ascent));
    }
    const double after = distance(999);
    CHECK(after < 0.25 * before);
    CHECK(after < 0.5);
}

TEST_CASE("training concentrates the budget on the only important triplet") {
    const EnvLayout layout;
    Workload w;
    w.scenarios = {scenario({1.0, 0.0, 0.0}, 1e-7, 400.0)};
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 16;
    cfg.denoiser_hidden = {32, 32};
    cfg.critic_hidden = {32, 32};
    cfg.denoising_steps = 6;
    cfg.actor_lr = 1e-3;
    cfg.critic_lr = 1e-3;
    const auto res = train(w, cfg, layout);

    const auto env = encode_environment(w.scenarios[0], layout);
    double share = 0.0;
    const int draws = 20;
    for (int k = 0; k < draws; ++k) {
        const auto z = reverse_sample(env, res.policy.denoiser, res.policy.schedule, 100 + k);
        const auto alloc = softmax_allocation(std::span<const double>(z.data(), 3), Budget(400.0));
        CHECK(alloc.total() == doctest::Approx(400.0));
        share += alloc.powers[0] / 400.0 / draws;
    }
    CHECK(share >= 0.9);
    const auto orc = grid_oracle(w.scenarios[0].importances, Budget(400.0), w.scenarios[0].chan, CodingParams{});
    CHECK(orc.allocation.powers[0] == doctest::Approx(400.0));
}

TEST_CASE("training bookkeeping and reproducibility") {
    const EnvLayout layout;
    Workload w;
    w.scenarios = {scenario({0.9, 0.4, 0.1}, 3e-7, 500.0), scenario({0.5, 0.5}, 1e-6, 500.0)};
    w.users = 2;
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.denoiser_hidden = {16};
    cfg.critic_hidden = {16};
    cfg.denoising_steps = 4;

    const auto a = train(w, cfg, layout);
    const auto b = train(w, cfg, layout);
    CHECK(a.curve.size() == 3);
    CHECK(a.curve == b.curve);
    CHECK(a.policy.denoiser.net.params() == b.policy.denoiser.net.params());
    for (double q : a.curve) {
        CHECK(q >= 0.0);
        CHECK(q <= 2.0 * 1.4 + 1e-12);
    }

    cfg.epochs = 0;
    const auto none = train(w, cfg, layout);
    CHECK(none.curve.empty());
    CHECK(none.policy.denoiser.net.num_params() > 0);

    cfg.seed = 5;
    cfg.epochs = 2;
    CHECK(train(w, cfg, layout).curve != a.curve);
}

TEST_CASE("invalid training configs are rejected") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS(cfg.check());
    cfg = TrainConfig{};
    cfg.exploration_std = -1.0;
    CHECK_THROWS(cfg.check());
    cfg = TrainConfig{};
    cfg.denoising_steps = 0;
    CHECK_THROWS(cfg.check());
}
