// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <sys/wait.h>

#include "semra/config.hpp"
#include "semra/harness.hpp"

using namespace semra;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("semra_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.corpus.synth_images = 3;
    c.corpus.synth_triplets = 3;
    c.users = 2;
    c.budgets = {800, 1600};
    c.schemes = {Scheme::equal, Scheme::importance, Scheme::diffusion};
    c.denoising_steps = {3};
    c.epochs = 2;
    c.seeds = {0};
    c.train.batch_size = 8;
    c.train.denoiser_hidden = {16};
    c.train.critic_hidden = {16};
    c.pg.hidden = {16};
    return c;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " SEMRA_CLI_PATH " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parser reads documented keys") {
    const auto c = parse_experiment_config(R"(
        # comment line
        experiment = budget_convergence
        corpus = "data/c.json"    # trailing comment
        users = 3
        budgets = [800, 2400]
        schemes = diffusion, pg
        denoising_steps = [6, 12, 20]
        epochs = 50
        seeds = [1, 2]
        fading = awgn
        actor_lr = 2e-4
        denoiser_hidden = [64, 64]
        pg_action_std = 0.3
    )",
                                           "/base");
    CHECK(c.experiment == Experiment::budget_convergence);
    CHECK(c.corpus.path == fs::path("/base/data/c.json"));
    CHECK(c.users == 3);
    CHECK(c.budgets == std::vector<double>{800, 2400});
    CHECK(c.schemes == std::vector<Scheme>{Scheme::diffusion, Scheme::pg});
    CHECK(c.denoising_steps == std::vector<int>{6, 12, 20});
    CHECK(c.epochs == 50);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(c.fading == Fading::awgn);
    CHECK(c.train.actor_lr == doctest::Approx(2e-4));
    CHECK(c.train.denoiser_hidden == std::vector<int>{64, 64});
    CHECK(c.pg.action_std == doctest::Approx(0.3));
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS_AS(parse_experiment_config("colour = blue"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("users = 2\nusers = 3"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("users = two"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("budgets = []"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("schemes = equal, magic"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("just words"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("epochs = 0"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("budgets = [800, -1]"), config_error);
    try {
        parse_experiment_config("users = 1\n\nbogus = 1");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("convergence epoch estimator") {
    CHECK(convergence_epoch({}) == 0);
    CHECK(convergence_epoch({5.0}) == 1);
    std::vector<double> curve;
    for (int i = 0; i < 30; ++i) curve.push_back(i < 10 ? i * 0.1 : 1.0);
    CHECK(convergence_epoch(curve) == 11);
    curve.assign(40, 2.0);
    curve[0] = 1.0;
    curve[1] = 1.97;
    CHECK(convergence_epoch(curve) == 2);
}

TEST_CASE("user channels are seeded and inside the gain range") {
    ExperimentConfig c;
    const auto a = draw_users(c, 3);
    const auto b = draw_users(c, 3);
    REQUIRE(a.size() == c.users);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pathloss_gain == b[i].pathloss_gain);
        CHECK(a[i].pathloss_gain >= c.gain_min);
        CHECK(a[i].pathloss_gain <= c.gain_max);
    }
    CHECK(draw_users(c, 4)[0].pathloss_gain != a[0].pathloss_gain);
}

TEST_CASE("static power sweep is closed form and monotone") {
    auto c = tiny_config();
    c.schemes = {Scheme::equal, Scheme::importance};
    c.budgets = {400, 800, 1200, 1600, 2000, 2400};
    c.seeds = {0, 1};
    const auto r = run_power_sweep(c);
    CHECK(r.rows.size() == 2 * 6 * 2);
    for (const auto& row : r.rows) CHECK(row.epoch == c.epochs);
    for (std::size_t i = 0; i + 2 < r.rows.size(); ++i) {
        const auto& a = r.rows[i];
        const auto& b = r.rows[i + 2];  // same scheme and seed, next budget
        if (a.scheme == b.scheme && b.budget_w > a.budget_w) CHECK(b.mean_quality >= a.mean_quality - 1e-12);
    }
    c.budgets = {800};
    CHECK_THROWS(run_power_sweep(c));
}

TEST_CASE("row bookkeeping matches the sweep dimensions") {
    auto c = tiny_config();
    c.schemes = {Scheme::diffusion, Scheme::pg, Scheme::equal};
    c.denoising_steps = {2, 3};
    c.budgets = {2000};
    c.seeds = {0, 1};
    const auto r = run_convergence(c);
    // (2 T values + pg + equal) x 1 budget x 2 seeds x 2 epochs.
    CHECK(r.rows.size() == (2 + 1 + 1) * 1 * 2 * 2);
    CHECK(r.convergence.empty());

    c.epochs = 1;
    c.seeds = {0};
    const auto single = run_convergence(c);
    CHECK(single.rows.size() == 4);
    for (const auto& row : single.rows) CHECK(row.epoch == 1);

    c.schemes = {Scheme::equal};
    CHECK_THROWS(run_convergence(c));
}

TEST_CASE("budget convergence reports one estimate per trained curve") {
    auto c = tiny_config();
    c.schemes = {Scheme::diffusion, Scheme::equal};
    c.epochs = 3;
    c.seeds = {0, 1};
    const auto r = run_budget_convergence(c);
    CHECK(r.convergence.size() == 2 * 2);
    for (const auto& e : r.convergence) {
        CHECK(e.epoch >= 1);
        CHECK(e.epoch <= 3);
    }
    const auto again = run_budget_convergence(c);
    for (std::size_t i = 0; i < r.convergence.size(); ++i) CHECK(again.convergence[i].epoch == r.convergence[i].epoch);
}

TEST_CASE("parallel jobs produce the same rows as a serial run") {
    auto c = tiny_config();
    c.seeds = {0, 1};
    const auto serial = run_power_sweep(c, {1, 0});
    const auto parallel = run_power_sweep(c, {3, 0});
    CHECK(serial.rows == parallel.rows);
    const auto shifted = run_power_sweep(c, {1, 10});
    CHECK(shifted.rows.front().seed == 10);
}

TEST_CASE("emitted CSV has the exact header and is byte identical across runs") {
    const auto c = tiny_config();
    const auto dir_a = scratch_dir("a");
    const auto dir_b = scratch_dir("b");
    emit_outputs(run_power_sweep(c), dir_a);
    emit_outputs(run_power_sweep(c), dir_b);
    const auto csv = slurp(dir_a / "results.csv");
    CHECK(csv == slurp(dir_b / "results.csv"));
    CHECK(csv.substr(0, csv.find('\n')) == "scheme,T,budget_w,seed,epoch,mean_quality");
    CHECK(count_of(csv, "\n") == 1 + 3 * 2);
    const auto chart = slurp(dir_a / "power_sweep.svg");
    CHECK(count_of(chart, "<polyline") == 3);
    CHECK(chart == slurp(dir_b / "power_sweep.svg"));
}

TEST_CASE("empty results give a header-only CSV and no chart") {
    const auto dir = scratch_dir("empty");
    SweepResult empty;
    const auto written = emit_outputs(empty, dir);
    CHECK(written.size() == 1);
    CHECK(slurp(dir / "results.csv") == std::string(kCsvHeader) + "\n");
    for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".svg");
}

TEST_CASE("convergence and budget charts use the right file names") {
    SweepResult r;
    r.experiment = Experiment::budget_convergence;
    r.rows = {{Scheme::diffusion, 12, 800, 0, 1, 1.0}, {Scheme::diffusion, 12, 800, 0, 2, 1.5},
              {Scheme::diffusion, 12, 2400, 0, 1, 2.0}, {Scheme::diffusion, 12, 2400, 0, 2, 3.0}};
    r.convergence = {{Scheme::diffusion, 12, 800, 0, 2}, {Scheme::diffusion, 12, 2400, 0, 2}};
    const auto dir = scratch_dir("budget");
    emit_outputs(r, dir);
    CHECK(fs::exists(dir / "budget_convergence.svg"));
    CHECK(count_of(slurp(dir / "budget_convergence.svg"), "<polyline") == 2);
    CHECK(slurp(dir / "convergence_epochs.csv") ==
          "scheme,T,budget_w,seed,convergence_epoch\ndiffusion,12,800,0,2\ndiffusion,12,2400,0,2\n");
    CHECK(final_rows(r).rows.size() == 2);
    CHECK(final_rows(r).rows[1].mean_quality == 3.0);
}

TEST_CASE("command line exit codes and output directory precedence") {
    const auto dir = scratch_dir("cli");
    const auto corpus = (dir / "corpus.json").string();
    CHECK(run_cli("synth --images 3 --triplets 2 --seed 5 --out " + corpus) == 0);
    CHECK(run_cli("validate " + corpus) == 0);

    std::ofstream(dir / "bad.json") << R"({"provenance": {"kind": "synthetic", "note": ""},
      "records": [{"image_id": "x", "triplets": [{"subject": "a", "relation": "b", "object": "c", "importance": 1.3}]}]})";
    CHECK(run_cli("validate " + (dir / "bad.json").string()) != 0);
    CHECK(run_cli("validate " + (dir / "missing.json").string()) != 0);
    CHECK(run_cli("frobnicate") != 0);

    std::ofstream(dir / "run.toml") << "schemes = [equal, importance]\nbudgets = [800, 1600]\nepochs = 1\n"
                                       "corpus = corpus.json\noutput_dir = "
                                    << (dir / "from_config").string() << "\n";
    const auto cfg = (dir / "run.toml").string();
    CHECK(run_cli("run " + cfg) == 0);
    CHECK(fs::exists(dir / "from_config" / "results.csv"));
    CHECK(run_cli("run " + cfg, "SEMRA_OUT_DIR=" + (dir / "from_env").string()) == 0);
    CHECK(fs::exists(dir / "from_env" / "results.csv"));
    CHECK(run_cli("run " + cfg + " --out " + (dir / "from_flag").string(),
                  "SEMRA_OUT_DIR=" + (dir / "ignored").string()) == 0);
    CHECK(fs::exists(dir / "from_flag" / "results.csv"));
    CHECK_FALSE(fs::exists(dir / "ignored"));

    std::ofstream(dir / "broken.toml") << "users = none\n";
    CHECK(run_cli("run " + (dir / "broken.toml").string()) != 0);
}

TEST_CASE("shipped configs parse and the bundled corpus validates") {
    const fs::path root = SEMRA_SOURCE_DIR;
    for (const char* name : {"power_sweep.toml", "convergence.toml", "budget_convergence.toml", "smoke.toml"}) {
        INFO(name);
        const auto c = load_experiment_config(root / "configs" / name);
        CHECK_NOTHROW(c.corpus.load());
    }
    const auto sweep = load_experiment_config(root / "configs" / "power_sweep.toml");
    CHECK(sweep.budgets == std::vector<double>{800, 1200, 1600, 2000, 2400});
    CHECK(sweep.seeds.size() >= 5);
    CHECK(load_corpus(root / "data" / "synthetic_corpus.json") == synth_corpus(16, 4, 2026));
}
