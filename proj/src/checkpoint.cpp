// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace semra {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "semra-diffusion-policy";

json params_to_json(const Eigen::VectorXd& p) {
    return std::vector<double>(p.data(), p.data() + p.size());
}

Mlp mlp_from_json(const json& j, const char* what) {
    Mlp net(j.at("sizes").get<std::vector<int>>());
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.num_params()) {
        throw std::runtime_error(std::string("checkpoint: ") + what + " has " + std::to_string(params.size()) +
                                 " parameters, layer shapes need " + std::to_string(net.num_params()));
    }
    net.params() = Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
    return net;
}

json config_to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"steps_per_epoch", c.steps_per_epoch},
            {"batch_size", c.batch_size},
            {"actor_lr", c.actor_lr},
            {"critic_lr", c.critic_lr},
            {"exploration_std", c.exploration_std},
            {"exploration_final", c.exploration_final},
            {"critic_samples", c.critic_samples},
            {"critic_updates", c.critic_updates},
            {"broad_samples", c.broad_samples},
            {"broad_std", c.broad_std},
            {"logit_penalty", c.logit_penalty},
            {"replay_capacity", c.replay_capacity},
            {"critic_batch", c.critic_batch},
            {"denoising_steps", c.denoising_steps},
            {"beta_min", c.beta_min},
            {"beta_max", c.beta_max},
            {"denoiser_hidden", c.denoiser_hidden},
            {"critic_hidden", c.critic_hidden},
            {"seed", c.seed},
            {"eval_seed", c.eval_seed}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    j.at("epochs").get_to(c.epochs);
    j.at("steps_per_epoch").get_to(c.steps_per_epoch);
    j.at("batch_size").get_to(c.batch_size);
    j.at("actor_lr").get_to(c.actor_lr);
    j.at("critic_lr").get_to(c.critic_lr);
    j.at("exploration_std").get_to(c.exploration_std);
    j.at("exploration_final").get_to(c.exploration_final);
    j.at("critic_samples").get_to(c.critic_samples);
    j.at("critic_updates").get_to(c.critic_updates);
    j.at("broad_samples").get_to(c.broad_samples);
    j.at("broad_std").get_to(c.broad_std);
    j.at("logit_penalty").get_to(c.logit_penalty);
    j.at("replay_capacity").get_to(c.replay_capacity);
    j.at("critic_batch").get_to(c.critic_batch);
    j.at("denoising_steps").get_to(c.denoising_steps);
    j.at("beta_min").get_to(c.beta_min);
    j.at("beta_max").get_to(c.beta_max);
    j.at("denoiser_hidden").get_to(c.denoiser_hidden);
    j.at("critic_hidden").get_to(c.critic_hidden);
    j.at("seed").get_to(c.seed);
    j.at("eval_seed").get_to(c.eval_seed);
    c.check();
    return c;
}

}  // namespace

std::string checkpoint_to_json_text(const DiffusionPolicy& policy, const TrainConfig& config) {
    const json j = {
        {"format", kFormat},
        {"version", kCheckpointVersion},
        {"layout", {{"n_max", policy.layout.n_max}, {"budget_scale", policy.layout.budget_scale}}},
        {"schedule", {{"betas", policy.schedule.betas()}}},
        {"denoiser",
         {{"sizes", policy.denoiser.net.sizes()},
          {"time_dim", policy.denoiser.time_dim},
          {"params", params_to_json(policy.denoiser.net.params())}}},
        {"critic", {{"sizes", policy.critic.net.sizes()}, {"params", params_to_json(policy.critic.net.params())}}},
        {"train_config", config_to_json(config)},
    };
    return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    try {
        if (j.at("format") != kFormat) throw std::runtime_error("checkpoint: unrecognised format tag");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
        }
        Checkpoint c;
        c.config = config_from_json(j.at("train_config"));
        auto& p = c.policy;
        j.at("layout").at("n_max").get_to(p.layout.n_max);
        j.at("layout").at("budget_scale").get_to(p.layout.budget_scale);
        p.schedule = NoiseSchedule(j.at("schedule").at("betas").get<std::vector<double>>());

        const auto& d = j.at("denoiser");
        p.denoiser.net = mlp_from_json(d, "denoiser");
        p.denoiser.n_max = p.layout.n_max;
        p.denoiser.env_dim = p.layout.dim();
        d.at("time_dim").get_to(p.denoiser.time_dim);
        const auto nm = static_cast<int>(p.layout.n_max);
        if (p.denoiser.net.input_size() != nm + p.denoiser.time_dim + static_cast<int>(p.layout.dim()) ||
            p.denoiser.net.output_size() != nm) {
            throw std::runtime_error("checkpoint: denoiser shape does not match the layout");
        }

        p.critic.net = mlp_from_json(j.at("critic"), "critic");
        p.critic.n_max = p.layout.n_max;
        p.critic.env_dim = p.layout.dim();
        if (p.critic.net.input_size() != 2 * nm + static_cast<int>(p.layout.dim()) || p.critic.net.output_size() != 1) {
            throw std::runtime_error("checkpoint: critic shape does not match the layout");
        }
        return c;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const DiffusionPolicy& policy, const TrainConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    out << checkpoint_to_json_text(policy, config);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json_text(ss.str());
}

}  // namespace semra
