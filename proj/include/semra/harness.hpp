// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semra/channel.hpp"
#include "semra/corpus.hpp"
#include "semra/diffusion_policy.hpp"
#include "semra/pg_baseline.hpp"

namespace semra {

enum class Scheme { equal, importance, diffusion, pg };
Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

enum class Experiment { convergence, power_sweep, budget_convergence };
Experiment parse_experiment(const std::string& name);
std::string to_string(Experiment e);

/// Either a corpus file or the parameters of a synthetic one.
struct CorpusSource {
    std::filesystem::path path;  // empty selects the synthetic corpus
    std::size_t synth_images = 16;
    std::size_t synth_triplets = 4;
    std::uint64_t synth_seed = 2026;

    Corpus load() const;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::power_sweep;
    CorpusSource corpus;
    std::size_t users = 4;
    // Per-user path gain is drawn log-uniformly from [gain_min, gain_max]
    // using the run seed; noise power and fading are shared.
    double gain_min = 1e-7;
    double gain_max = 1e-6;
    double noise_power = 5e-6;
    Fading fading = Fading::rayleigh;
    CodingParams coding;
    std::vector<double> budgets{2000.0};
    std::vector<Scheme> schemes{Scheme::equal, Scheme::importance, Scheme::diffusion};
    std::vector<int> denoising_steps{12};
    int epochs = 300;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path output_dir = "results";
    TrainConfig train;  // epochs, denoising_steps and seed are set per job
    PgConfig pg;        // epochs and seed are set per job

    void check() const;
};

/// Channel parameters of every user for one seed.
std::vector<ChannelParams> draw_users(const ExperimentConfig& config, std::uint64_t seed);

struct SweepRow {
    Scheme scheme = Scheme::equal;
    int T = 0;  // denoising steps; 0 for schemes without a chain
    double budget_w = 0.0;
    std::uint64_t seed = 0;
    int epoch = 0;  // 1-based; power-sweep rows carry the final epoch
    double mean_quality = 0.0;

    bool operator==(const SweepRow&) const = default;
};

struct ConvergenceEstimate {
    Scheme scheme = Scheme::diffusion;
    int T = 0;
    double budget_w = 0.0;
    std::uint64_t seed = 0;
    int epoch = 0;
};

struct SweepResult {
    Experiment experiment = Experiment::power_sweep;
    std::vector<SweepRow> rows;
    std::vector<ConvergenceEstimate> convergence;  // budget_convergence only
};

struct RunOptions {
    unsigned jobs = 1;
    std::uint64_t seed_offset = 0;
};

/// First 1-based epoch whose value lies within `tolerance` (relative) of the
/// mean of the last `tail` epochs. Returns 0 for an empty curve.
int convergence_epoch(const std::vector<double>& curve, std::size_t tail = 20, double tolerance = 0.02);

/// Per-epoch curves for every (scheme, T, budget, seed). Static schemes appear
/// as constant curves with T = 0.
SweepResult run_convergence(const ExperimentConfig& config, const RunOptions& options = {});
/// Final quality per (scheme, T, budget, seed); trained schemes are retrained
/// at every budget.
SweepResult run_power_sweep(const ExperimentConfig& config, const RunOptions& options = {});
/// Curves as in run_convergence plus a convergence-epoch estimate per trained curve.
SweepResult run_budget_convergence(const ExperimentConfig& config, const RunOptions& options = {});

SweepResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Keeps only the last epoch of each curve.
SweepResult final_rows(const SweepResult& curves);

inline constexpr const char* kCsvHeader = "scheme,T,budget_w,seed,epoch,mean_quality";

std::string results_csv(const SweepResult& result);

/// Writes results.csv, plus convergence_epochs.csv when estimates exist, plus one SVG
/// chart when the result is non-empty. Returns the paths written.
std::vector<std::filesystem::path> emit_outputs(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace semra
