// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: run experiments, generate and validate corpora.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "semra/config.hpp"
#include "semra/corpus.hpp"
#include "semra/harness.hpp"

namespace {

constexpr const char* kOutDirEnv = "SEMRA_OUT_DIR";

int cmd_run(const std::string& config_path, const std::string& out_flag, unsigned jobs, std::uint64_t seed_offset) {
    const auto config = semra::load_experiment_config(config_path);
    std::filesystem::path out = config.output_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) out = env;
    if (!out_flag.empty()) out = out_flag;

    const auto result = semra::run_experiment(config, {jobs, seed_offset});
    for (const auto& c : result.convergence) {
        std::cout << "convergence " << semra::to_string(c.scheme) << " T=" << c.T << " budget=" << c.budget_w
                  << " W seed=" << c.seed << ": epoch " << c.epoch << "\n";
    }
    for (const auto& p : semra::emit_outputs(result, out)) std::cout << "wrote " << p.string() << "\n";
    return 0;
}

int cmd_synth(std::size_t images, std::size_t triplets, std::uint64_t seed, const std::string& out) {
    semra::save_corpus(semra::synth_corpus(images, triplets, seed), out);
    std::cout << "wrote " << out << " (" << images << " records)\n";
    return 0;
}

int cmd_validate(const std::string& path) {
    const auto corpus = semra::load_corpus(path);
    std::size_t triplets = 0;
    for (const auto& r : corpus.records) triplets += r.size();
    std::cout << path << ": ok, " << corpus.records.size() << " records, " << triplets << " triplets\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semra: importance-aware power allocation for semantic transmission"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned jobs = 1;
    std::uint64_t seed_offset = 0;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Experiment config (key = value)")->required();
    run->add_option("--out", out_dir, "Output directory; overrides the config and $" + std::string(kOutDirEnv));
    run->add_option("--jobs", jobs, "Parallel sweep jobs")->check(CLI::PositiveNumber);
    run->add_option("--seed-offset", seed_offset, "Added to every configured seed");

    std::size_t images = 0;
    std::size_t triplets = 0;
    std::uint64_t seed = 0;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
    synth->add_option("--images", images, "Number of records")->required()->check(CLI::PositiveNumber);
    synth->add_option("--triplets", triplets, "Triplets per record")->required()->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed, "Generator seed")->required();
    synth->add_option("--out", synth_out, "Output corpus path")->required();

    std::string corpus_path;
    auto* validate = app.add_subcommand("validate", "Check a corpus file against the schema");
    validate->add_option("corpus", corpus_path, "Corpus JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, out_dir, jobs, seed_offset);
        if (*synth) return cmd_synth(images, triplets, seed, synth_out);
        if (*validate) return cmd_validate(corpus_path);
    } catch (const std::exception& e) {
        std::cerr << "semra: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
