// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace semra {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_list(std::string v) {
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw config_error("unterminated list");
        v = v.substr(1, v.size() - 2);
    }
    std::vector<std::string> items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(trim(item));
        if (item.empty()) throw config_error("empty list element");
        items.push_back(item);
    }
    if (items.empty()) throw config_error("empty list");
    return items;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw config_error("expected a number, got '" + s + "'");
    }
    if (used != s.size()) throw config_error("expected a number, got '" + s + "'");
    return v;
}

template <class Int>
Int to_int(const std::string& s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw config_error("expected an integer, got '" + s + "'");
    return v;
}

template <class T, class F>
std::vector<T> map_list(const std::string& v, F f) {
    std::vector<T> out;
    for (const auto& item : split_list(v)) out.push_back(f(item));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

std::map<std::string, Setter> setters(const std::filesystem::path& base_dir) {
    auto as_int = [](const std::string& s) { return to_int<int>(s); };
    std::map<std::string, Setter> m;
    m["experiment"] = [](auto& c, const auto& v) { c.experiment = parse_experiment(unquote(v)); };
    m["corpus"] = [base_dir](auto& c, const auto& v) {
        std::filesystem::path p = unquote(v);
        c.corpus.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    m["synth_images"] = [](auto& c, const auto& v) { c.corpus.synth_images = to_int<std::size_t>(v); };
    m["synth_triplets"] = [](auto& c, const auto& v) { c.corpus.synth_triplets = to_int<std::size_t>(v); };
    m["synth_seed"] = [](auto& c, const auto& v) { c.corpus.synth_seed = to_int<std::uint64_t>(v); };
    m["users"] = [](auto& c, const auto& v) { c.users = to_int<std::size_t>(v); };
    m["gain_min"] = [](auto& c, const auto& v) { c.gain_min = to_double(v); };
    m["gain_max"] = [](auto& c, const auto& v) { c.gain_max = to_double(v); };
    m["noise_power"] = [](auto& c, const auto& v) { c.noise_power = to_double(v); };
    m["fading"] = [](auto& c, const auto& v) { c.fading = parse_fading(unquote(v)); };
    m["triplet_bits"] = [](auto& c, const auto& v) { c.coding.triplet_bits = to_int<int>(v); };
    m["correctable_bits"] = [](auto& c, const auto& v) { c.coding.correctable_bits = to_int<int>(v); };
    m["budgets"] = [](auto& c, const auto& v) { c.budgets = map_list<double>(v, to_double); };
    m["schemes"] = [](auto& c, const auto& v) { c.schemes = map_list<Scheme>(v, parse_scheme); };
    m["denoising_steps"] = [as_int](auto& c, const auto& v) { c.denoising_steps = map_list<int>(v, as_int); };
    m["epochs"] = [](auto& c, const auto& v) { c.epochs = to_int<int>(v); };
    m["seeds"] = [](auto& c, const auto& v) {
        c.seeds = map_list<std::uint64_t>(v, [](const std::string& s) { return to_int<std::uint64_t>(s); });
    };
    m["output_dir"] = [](auto& c, const auto& v) { c.output_dir = unquote(v); };

    m["batch_size"] = [](auto& c, const auto& v) { c.train.batch_size = to_int<int>(v); };
    m["steps_per_epoch"] = [](auto& c, const auto& v) { c.train.steps_per_epoch = to_int<int>(v); };
    m["actor_lr"] = [](auto& c, const auto& v) { c.train.actor_lr = to_double(v); };
    m["critic_lr"] = [](auto& c, const auto& v) { c.train.critic_lr = to_double(v); };
    m["exploration_std"] = [](auto& c, const auto& v) { c.train.exploration_std = to_double(v); };
    m["exploration_final"] = [](auto& c, const auto& v) { c.train.exploration_final = to_double(v); };
    m["critic_samples"] = [](auto& c, const auto& v) { c.train.critic_samples = to_int<int>(v); };
    m["critic_updates"] = [](auto& c, const auto& v) { c.train.critic_updates = to_int<int>(v); };
    m["broad_samples"] = [](auto& c, const auto& v) { c.train.broad_samples = to_int<int>(v); };
    m["broad_std"] = [](auto& c, const auto& v) { c.train.broad_std = to_double(v); };
    m["logit_penalty"] = [](auto& c, const auto& v) { c.train.logit_penalty = to_double(v); };
    m["replay_capacity"] = [](auto& c, const auto& v) { c.train.replay_capacity = to_int<int>(v); };
    m["critic_batch"] = [](auto& c, const auto& v) { c.train.critic_batch = to_int<int>(v); };
    m["beta_min"] = [](auto& c, const auto& v) { c.train.beta_min = to_double(v); };
    m["beta_max"] = [](auto& c, const auto& v) { c.train.beta_max = to_double(v); };
    m["denoiser_hidden"] = [as_int](auto& c, const auto& v) { c.train.denoiser_hidden = map_list<int>(v, as_int); };
    m["critic_hidden"] = [as_int](auto& c, const auto& v) { c.train.critic_hidden = map_list<int>(v, as_int); };
    m["eval_seed"] = [](auto& c, const auto& v) { c.train.eval_seed = to_int<std::uint64_t>(v); };

    m["pg_lr"] = [](auto& c, const auto& v) { c.pg.lr = to_double(v); };
    m["pg_action_std"] = [](auto& c, const auto& v) { c.pg.action_std = to_double(v); };
    m["pg_baseline_decay"] = [](auto& c, const auto& v) { c.pg.baseline_decay = to_double(v); };
    m["pg_hidden"] = [as_int](auto& c, const auto& v) { c.pg.hidden = map_list<int>(v, as_int); };
    return m;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir) {
    const auto table = setters(base_dir);
    ExperimentConfig config;
    std::map<std::string, int> seen;
    std::stringstream ss(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end()) throw config_error(where + "unknown key '" + key + "'");
        if (seen.count(key)) {
            throw config_error(where + "key '" + key + "' already set on line " + std::to_string(seen[key]));
        }
        seen[key] = line_no;
        if (value.empty()) throw config_error(where + "missing value for '" + key + "'");
        try {
            it->second(config, value);
        } catch (const config_error& e) {
            throw config_error(where + key + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw config_error(where + key + ": " + e.what());
        }
    }
    try {
        config.check();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), path.parent_path());
}

}  // namespace semra
