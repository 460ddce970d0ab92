// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "svg.hpp"

namespace semra {

Scheme parse_scheme(const std::string& name) {
    if (name == "equal") return Scheme::equal;
    if (name == "importance") return Scheme::importance;
    if (name == "diffusion") return Scheme::diffusion;
    if (name == "pg") return Scheme::pg;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::equal: return "equal";
        case Scheme::importance: return "importance";
        case Scheme::diffusion: return "diffusion";
        case Scheme::pg: return "pg";
    }
    return "?";
}

Experiment parse_experiment(const std::string& name) {
    if (name == "convergence") return Experiment::convergence;
    if (name == "power_sweep") return Experiment::power_sweep;
    if (name == "budget_convergence") return Experiment::budget_convergence;
    throw std::invalid_argument("unknown experiment: " + name);
}

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::convergence: return "convergence";
        case Experiment::power_sweep: return "power_sweep";
        case Experiment::budget_convergence: return "budget_convergence";
    }
    return "?";
}

Corpus CorpusSource::load() const {
    if (!path.empty()) return load_corpus(path);
    return synth_corpus(synth_images, synth_triplets, synth_seed);
}

void ExperimentConfig::check() const {
    if (users < 1) throw std::invalid_argument("config: users must be >= 1");
    if (!(gain_min > 0.0 && gain_min <= gain_max)) throw std::invalid_argument("config: need 0 < gain_min <= gain_max");
    if (!(noise_power > 0.0)) throw std::invalid_argument("config: noise_power must be > 0");
    coding.check();
    if (budgets.empty()) throw std::invalid_argument("config: budgets must be non-empty");
    for (double b : budgets) {
        if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("config: budgets must be > 0");
    }
    if (schemes.empty()) throw std::invalid_argument("config: schemes must be non-empty");
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        if (std::count(schemes.begin(), schemes.end(), schemes[i]) > 1) {
            throw std::invalid_argument("config: scheme " + to_string(schemes[i]) + " listed twice");
        }
    }
    if (denoising_steps.empty()) throw std::invalid_argument("config: denoising_steps must be non-empty");
    for (int t : denoising_steps) {
        if (t < 1) throw std::invalid_argument("config: denoising_steps must be >= 1");
    }
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (corpus.path.empty() && (corpus.synth_images < 1 || corpus.synth_triplets < 1)) {
        throw std::invalid_argument("config: synthetic corpus needs images and triplets >= 1");
    }
    train.check();
    pg.check();
}

std::vector<ChannelParams> draw_users(const ExperimentConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_gain(std::log(config.gain_min), std::log(config.gain_max));
    std::vector<ChannelParams> users(config.users);
    for (auto& u : users) {
        u.noise_power = config.noise_power;
        u.fading = config.fading;
        u.pathloss_gain = config.gain_min == config.gain_max ? config.gain_min : std::exp(log_gain(rng));
    }
    return users;
}

int convergence_epoch(const std::vector<double>& curve, std::size_t tail, double tolerance) {
    if (curve.empty()) return 0;
    const std::size_t n = std::min(std::max<std::size_t>(tail, 1), curve.size());
    double mean = 0.0;
    for (std::size_t i = curve.size() - n; i < curve.size(); ++i) mean += curve[i];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (std::abs(curve[i] - mean) <= tolerance * std::abs(mean)) return static_cast<int>(i + 1);
    }
    return static_cast<int>(curve.size());
}

namespace {

struct Job {
    Scheme scheme;
    int T;
    double budget;
    std::uint64_t seed;
};

bool trained(Scheme s) { return s == Scheme::diffusion || s == Scheme::pg; }

std::vector<Job> make_jobs(const ExperimentConfig& config, const RunOptions& options) {
    std::vector<Job> jobs;
    for (Scheme s : config.schemes) {
        const std::vector<int> ts = s == Scheme::diffusion ? config.denoising_steps : std::vector<int>{0};
        for (int t : ts) {
            for (double b : config.budgets) {
                for (std::uint64_t seed : config.seeds) jobs.push_back({s, t, b, seed + options.seed_offset});
            }
        }
    }
    return jobs;
}

std::vector<double> run_job(const ExperimentConfig& config, const Corpus& corpus, const Job& job) {
    const auto users = draw_users(config, job.seed);
    const Workload w = make_workload(corpus, users, config.coding, job.budget);
    EnvLayout layout;
    layout.n_max = std::max(layout.n_max, corpus.max_triplets());

    switch (job.scheme) {
        case Scheme::equal:
        case Scheme::importance: {
            const double q =
                evaluate_static(w, job.scheme == Scheme::equal ? StaticScheme::equal : StaticScheme::importance);
            return std::vector<double>(static_cast<std::size_t>(config.epochs), q);
        }
        case Scheme::diffusion: {
            TrainConfig tc = config.train;
            tc.epochs = config.epochs;
            tc.denoising_steps = job.T;
            tc.seed = job.seed;
            return train(w, tc, layout).curve;
        }
        case Scheme::pg: {
            PgConfig pc = config.pg;
            pc.epochs = config.epochs;
            pc.seed = job.seed;
            return pg_baseline_train(w, pc, layout).curve;
        }
    }
    throw std::logic_error("unhandled scheme");
}

// Runs jobs on up to `workers` threads. Results are stored by job index, so
// the output order never depends on scheduling.
std::vector<std::vector<double>> run_jobs(const ExperimentConfig& config, const Corpus& corpus,
                                          const std::vector<Job>& jobs, unsigned workers) {
    std::vector<std::vector<double>> curves(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                curves[i] = run_job(config, corpus, jobs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return curves;
}

double quality_ceiling(const Corpus& corpus, std::size_t users) {
    double best = 0.0;
    for (const auto& r : corpus.records) best = std::max(best, quality_upper_bound(r));
    return static_cast<double>(users) * best;
}

SweepResult run_curves(const ExperimentConfig& config, const RunOptions& options, Experiment kind) {
    config.check();
    const Corpus corpus = config.corpus.load();
    const auto jobs = make_jobs(config, options);
    const auto curves = run_jobs(config, corpus, jobs, options.jobs);
    const double ceiling = quality_ceiling(corpus, config.users);

    SweepResult result;
    result.experiment = kind;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& j = jobs[i];
        for (std::size_t e = 0; e < curves[i].size(); ++e) {
            const double q = curves[i][e];
            if (!(q >= 0.0 && q <= ceiling * (1.0 + 1e-12))) {
                throw std::logic_error("quality " + std::to_string(q) + " outside [0, " + std::to_string(ceiling) +
                                       "]");
            }
            result.rows.push_back({j.scheme, j.T, j.budget, j.seed, static_cast<int>(e + 1), q});
        }
        if (kind == Experiment::budget_convergence && trained(j.scheme)) {
            result.convergence.push_back({j.scheme, j.T, j.budget, j.seed, convergence_epoch(curves[i])});
        }
    }
    return result;
}

bool has_scheme(const ExperimentConfig& c, Scheme s) {
    return std::find(c.schemes.begin(), c.schemes.end(), s) != c.schemes.end();
}

}  // namespace

SweepResult final_rows(const SweepResult& curves) {
    SweepResult out;
    out.experiment = curves.experiment;
    for (std::size_t i = 0; i < curves.rows.size(); ++i) {
        const auto& r = curves.rows[i];
        const bool last = i + 1 == curves.rows.size() || curves.rows[i + 1].epoch <= r.epoch;
        if (last) out.rows.push_back(r);
    }
    return out;
}

SweepResult run_convergence(const ExperimentConfig& config, const RunOptions& options) {
    if (!has_scheme(config, Scheme::diffusion) && !has_scheme(config, Scheme::pg)) {
        throw std::invalid_argument("convergence: schemes must include diffusion or pg");
    }
    return run_curves(config, options, Experiment::convergence);
}

SweepResult run_power_sweep(const ExperimentConfig& config, const RunOptions& options) {
    if (config.budgets.size() < 2) throw std::invalid_argument("power sweep: need at least two budgets");
    auto res = final_rows(run_curves(config, options, Experiment::power_sweep));
    res.experiment = Experiment::power_sweep;
    return res;
}

SweepResult run_budget_convergence(const ExperimentConfig& config, const RunOptions& options) {
    if (!has_scheme(config, Scheme::diffusion)) {
        throw std::invalid_argument("budget convergence: schemes must include diffusion");
    }
    if (config.budgets.size() < 2) throw std::invalid_argument("budget convergence: need at least two budgets");
    return run_curves(config, options, Experiment::budget_convergence);
}

SweepResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    switch (config.experiment) {
        case Experiment::convergence: return run_convergence(config, options);
        case Experiment::power_sweep: return run_power_sweep(config, options);
        case Experiment::budget_convergence: return run_budget_convergence(config, options);
    }
    throw std::logic_error("unhandled experiment");
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string budget_label(double w) { return fmt("%g", w) + " W"; }

// Mean over seeds, one series per (scheme, T[, budget]) in first-seen order.
std::vector<svg::Series> average_series(const SweepResult& r, bool x_is_budget, bool split_budget) {
    using Key = std::tuple<int, int, double>;
    std::vector<Key> order;
    std::map<Key, std::map<double, std::pair<double, int>>> acc;
    for (const auto& row : r.rows) {
        const Key k{static_cast<int>(row.scheme), row.T, split_budget ? row.budget_w : 0.0};
        if (!acc.count(k)) order.push_back(k);
        auto& cell = acc[k][x_is_budget ? row.budget_w / 1000.0 : row.epoch];
        cell.first += row.mean_quality;
        cell.second += 1;
    }
    std::vector<svg::Series> out;
    for (const auto& k : order) {
        svg::Series s;
        const auto scheme = static_cast<Scheme>(std::get<0>(k));
        s.label = to_string(scheme);
        if (scheme == Scheme::diffusion) s.label += " T=" + std::to_string(std::get<1>(k));
        if (split_budget) s.label += " " + budget_label(std::get<2>(k));
        for (const auto& [x, sum] : acc[k]) {
            s.x.push_back(x);
            s.y.push_back(sum.first / sum.second);
        }
        out.push_back(std::move(s));
    }
    return out;
}

bool several_budgets(const SweepResult& r) {
    for (const auto& row : r.rows) {
        if (row.budget_w != r.rows.front().budget_w) return true;
    }
    return false;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string results_csv(const SweepResult& result) {
    std::ostringstream o;
    o << kCsvHeader << "\n";
    for (const auto& r : result.rows) {
        o << to_string(r.scheme) << "," << r.T << "," << fmt("%.12g", r.budget_w) << "," << r.seed << "," << r.epoch
          << "," << fmt("%.10f", r.mean_quality) << "\n";
    }
    return o.str();
}

std::vector<std::filesystem::path> emit_outputs(const SweepResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    written.push_back(dir / "results.csv");
    write_file(written.back(), results_csv(result));

    if (!result.convergence.empty()) {
        std::ostringstream o;
        o << "scheme,T,budget_w,seed,convergence_epoch\n";
        for (const auto& c : result.convergence) {
            o << to_string(c.scheme) << "," << c.T << "," << fmt("%.12g", c.budget_w) << "," << c.seed << ","
              << c.epoch << "\n";
        }
        written.push_back(dir / "convergence_epochs.csv");
        write_file(written.back(), o.str());
    }
    if (result.rows.empty()) return written;

    std::string name;
    std::string chart;
    const std::string y_label = "mean semantic transmission quality";
    switch (result.experiment) {
        case Experiment::convergence:
            name = "convergence.svg";
            chart = svg::line_chart("Quality versus training epochs", "epoch", y_label,
                                    average_series(result, false, several_budgets(result)));
            break;
        case Experiment::power_sweep:
            name = "power_sweep.svg";
            chart = svg::line_chart("Quality versus total transmit power", "total transmit power (kW)", y_label,
                                    average_series(result, true, false));
            break;
        case Experiment::budget_convergence:
            name = "budget_convergence.svg";
            chart = svg::line_chart("Training curves per power budget", "epoch", y_label,
                                    average_series(result, false, true));
            break;
    }
    written.push_back(dir / name);
    write_file(written.back(), chart);
    return written;
}

}  // namespace semra
