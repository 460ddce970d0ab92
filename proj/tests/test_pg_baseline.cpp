// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "gradcheck.hpp"
#include "semra/pg_baseline.hpp"

using namespace semra;

namespace {

Workload two_scenarios() {
    ChannelParams a;
    a.pathloss_gain = 3e-7;
    ChannelParams b;
    b.pathloss_gain = 8e-7;
    Workload w;
    w.scenarios = {{{0.9, 0.4, 0.1}, a, CodingParams{}, 500.0}, {{0.6, 0.5}, b, CodingParams{}, 500.0}};
    return w;
}

}  // namespace

TEST_CASE("surrogate gradient matches finite differences") {
    const EnvLayout layout;
    const auto w = two_scenarios();
    const EnvBatch env = make_env_batch(w.scenarios, layout);
    PgConfig cfg;
    cfg.hidden = {6, 5};
    std::mt19937_64 rng(1);
    auto policy = make_gaussian_policy(layout, cfg, rng);
    const Eigen::MatrixXd actions = Eigen::MatrixXd::Random(layout.n_max, 2);
    const Eigen::Vector2d adv(0.7, -0.3);

    const auto lg = pg_surrogate(policy, env, actions, adv);
    auto& p = policy.mean_net.params();
    const auto rep = semra::testing::check_gradient(
        [&](const Eigen::VectorXd&) { return pg_surrogate(policy, env, actions, adv).value; }, p, lg.grad, 60, 4);
    CHECK(rep.failed == 0);
    CHECK_THROWS(pg_surrogate(policy, env, actions, Eigen::VectorXd::Zero(3)));
}

TEST_CASE("zero learning rate gives a flat curve") {
    PgConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    cfg.hidden = {16};
    cfg.lr = 0.0;
    const auto res = pg_baseline_train(two_scenarios(), cfg, EnvLayout{});
    REQUIRE(res.curve.size() == 4);
    for (double q : res.curve) CHECK(q == res.curve.front());
}

TEST_CASE("single-triplet scenarios always receive the full budget") {
    ChannelParams chan;
    Workload w;
    w.scenarios = {{{0.8}, chan, CodingParams{}, 500.0}};
    PgConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.hidden = {8};
    const auto res = pg_baseline_train(w, cfg, EnvLayout{});
    const double full = transmission_quality(w.scenarios[0].importances, std::vector<double>{500.0}, chan,
                                             CodingParams{});
    for (double q : res.curve) CHECK(q == doctest::Approx(full));
}

TEST_CASE("training is reproducible and improves on a simple workload") {
    PgConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 32;
    cfg.hidden = {32, 32};
    Workload w;
    w.scenarios = {{{1.0, 0.1, 0.1}, ChannelParams{}, CodingParams{}, 400.0}};
    const auto a = pg_baseline_train(w, cfg, EnvLayout{});
    const auto b = pg_baseline_train(w, cfg, EnvLayout{});
    CHECK(a.curve == b.curve);
    CHECK(a.curve.back() > a.curve.front() + 0.05);
}

TEST_CASE("config validation") {
    PgConfig cfg;
    cfg.action_std = 0.0;
    CHECK_THROWS(cfg.check());
    cfg = PgConfig{};
    cfg.baseline_decay = 1.0;
    CHECK_THROWS(cfg.check());
    CHECK_THROWS(pg_baseline_train(Workload{}, PgConfig{}, EnvLayout{}));
}
