#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cass/config.hpp"
#include "cass/errors.hpp"
#include "cass/eval.hpp"
#include "cass/experiment.hpp"
#include "cass/io.hpp"
#include "cass/trainer.hpp"

using namespace cass;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out, err;
};

std::string slurp_or_empty(const fs::path& p) {
    std::ifstream in(p);
    if (!in) return "";
    return std::string(std::istreambuf_iterator<char>(in), {});
}

CliResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    const std::string cmd =
        std::string(CASS_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp_or_empty(out);
    r.err = slurp_or_empty(err);
    return r;
}

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small, fast experiment: 8 two-second records at 64 Hz, a one-block network.
void write_config(const fs::path& path, const std::string& mode, int epochs) {
    std::ofstream out(path);
    out << "dataset.kind = ecg\n"
        << "dataset.n = 8\n"
        << "dataset.seed = 11\n"
        << "dataset.sample_rate = 64\n"
        << "dataset.duration = 2\n"
        << "stft.window_length = 64\n"
        << "stft.hop_length = 16\n"
        << "stft.fft_size = 64\n"
        << "network.latent_dim = 4\n"
        << "network.channels = 2\n"
        << "train.mode = " << mode << "\n"
        << "train.epochs = " << epochs << "\n"
        << "train.batch_size = 2\n"
        << "train.lr_ae = 0.001\n"
        << "train.lr_disc = 0.0001\n"
        << "train.eval_every = 1\n"
        << "train.checkpoint_every = 1\n"
        << "train.seed = 5\n";
}

ExperimentConfig library_view(const fs::path& cfg_path, const fs::path& out_dir,
                              uint64_t seed_override = 0) {
    ExperimentConfig cfg = load_experiment_config(cfg_path.string());
    cfg.out_dir = out_dir.string();
    if (seed_override) cfg.train.seed = seed_override;
    return cfg;
}

bool logs_match(const std::vector<EpochLog>& a, const std::vector<EpochLog>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].epoch != b[i].epoch || a[i].test_l2 != b[i].test_l2 ||
            a[i].ae_loss != b[i].ae_loss)
            return false;
        for (size_t j = 0; j < a[i].disc_loss.size(); ++j) {
            const double x = a[i].disc_loss[j], y = b[i].disc_loss[j];
            if (std::isnan(x) != std::isnan(y)) return false;
            if (!std::isnan(x) && x != y) return false;
        }
    }
    return true;
}

size_t line_count(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("argument failures exit with the usage code") {
    fs::path dir = fresh_dir("cass_cli_args");

    CliResult help = run_cli("--help", dir);
    CHECK(help.code == 0);
    CHECK(help.out.find("gen-data") != std::string::npos);
    CHECK(help.out.find("train") != std::string::npos);
    CHECK(help.out.find("eval") != std::string::npos);
    CHECK(help.out.find("cross-analysis") != std::string::npos);
    CHECK(help.out.find("compare") != std::string::npos);

    CHECK(run_cli("", dir).code == 2);                    // a subcommand is required
    CHECK(run_cli("--no-such-flag train", dir).code == 2);
    CHECK(run_cli("frobnicate", dir).code == 2);

    CliResult no_cfg = run_cli("gen-data", dir);
    CHECK(no_cfg.code == 2);
    CHECK(no_cfg.err.find("--config") != std::string::npos);

    // A missing config file is a data problem, not a usage problem.
    CHECK(run_cli("gen-data --config " + (dir / "nope.cfg").string(), dir).code == 3);

    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "dataset.kind = eeg\n";
    CHECK(run_cli("gen-data --config " + bad.string(), dir).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("gen-data writes once, skips cleanly and refuses tampered directories") {
    fs::path dir = fresh_dir("cass_cli_gen");
    const fs::path cfg = dir / "exp.cfg";
    write_config(cfg, "cass", 2);
    const std::string base = "--config " + cfg.string() + " --out " + (dir / "out").string();

    CliResult first = run_cli("gen-data " + base, dir);
    CHECK(first.code == 0);
    CHECK(first.out.find("wrote 8 records") != std::string::npos);
    CHECK(first.out.find("train") != std::string::npos); // the split summary

    const std::string ddir = dataset_dir(library_view(cfg, dir / "out"));
    REQUIRE(fs::exists(ddir + "/manifest.txt"));
    CHECK(fs::exists(ddir + "/source_config.txt"));
    for (int i = 0; i < 8; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "r%05d.bin", i);
        CHECK(fs::exists(fs::path(ddir) / "records" / name));
    }

    CliResult again = run_cli("gen-data " + base, dir);
    CHECK(again.code == 0);
    CHECK(again.out.find("up to date") != std::string::npos);

    // A directory whose recorded source no longer matches is left alone.
    std::ofstream(ddir + "/source_config.txt") << "dataset.kind = tampered\n";
    CliResult refused = run_cli("gen-data " + base, dir);
    CHECK(refused.code == 3);
    CHECK(refused.err.find("refusing") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("the workbench pipeline runs end to end") {
    fs::path dir = fresh_dir("cass_cli_pipe");
    const fs::path cfg = dir / "exp.cfg";
    const fs::path out = dir / "out";
    write_config(cfg, "cass", 2);
    const std::string base = "--config " + cfg.string() + " --out " + out.string();

    // train before gen-data: no dataset yet
    CliResult early = run_cli("train " + base, dir);
    CHECK(early.code == 3);
    CHECK(early.err.find("gen-data") != std::string::npos);

    REQUIRE(run_cli("gen-data " + base, dir).code == 0);

    // eval before any training: no checkpoint yet
    CHECK(run_cli("eval " + base, dir).code == 3);

    const ExperimentConfig lib = library_view(cfg, out);
    const std::string rdir = run_dir(lib);

    CliResult trained = run_cli("train " + base, dir);
    CHECK(trained.code == 0);
    CHECK(trained.out.find("trained 2 epochs") != std::string::npos);
    CHECK(trained.out.find("maternal=") != std::string::npos);
    CHECK(trained.out.find("fetal=") != std::string::npos);
    REQUIRE(fs::exists(rdir + "/logs.csv"));
    REQUIRE(fs::exists(rdir + "/run_manifest.txt"));
    REQUIRE(fs::exists(rdir + "/checkpoints/epoch_00001/trainer_state.txt"));
    REQUIRE(fs::exists(rdir + "/checkpoints/epoch_00002/component_0.bin"));

    // The manifest echoes the config and pins artifact hashes.
    const KvFile manifest = KvFile::parse_file(rdir + "/run_manifest.txt");
    CHECK(manifest.get_string("config.train.mode", "") == "cass");
    CHECK(manifest.get_string("config.dataset.kind", "") == "ecg");
    CHECK(manifest.get_string("config.hash", "") == config_hash(lib));
    CHECK(manifest.get_string("code.version", "") == kVersion);
    CHECK(manifest.get_u64("artifact.logs.csv", 0) == file_hash(rdir + "/logs.csv"));
    CHECK(manifest.get_u64("artifact.checkpoints/epoch_00002/component_0.bin", 0) ==
          file_hash(rdir + "/checkpoints/epoch_00002/component_0.bin"));

    // Rerunning into a populated run directory requires --resume.
    CliResult blocked = run_cli("train " + base, dir);
    CHECK(blocked.code == 3);
    CHECK(blocked.err.find("--resume") != std::string::npos);

    // Simulate an interrupted run: drop the final checkpoint, then resume.
    const auto final_logs = read_epoch_log_csv(rdir + "/logs.csv").logs;
    const uint64_t comp0_hash = file_hash(rdir + "/checkpoints/epoch_00002/component_0.bin");
    const uint64_t moments_hash =
        file_hash(rdir + "/checkpoints/epoch_00002/trainer_moments.bin");
    fs::remove_all(rdir + "/checkpoints/epoch_00002");
    CliResult resumed = run_cli("train --resume " + base, dir);
    CHECK(resumed.code == 0);
    CHECK(resumed.err.find("resuming from") != std::string::npos);
    CHECK(logs_match(read_epoch_log_csv(rdir + "/logs.csv").logs, final_logs));
    CHECK(file_hash(rdir + "/checkpoints/epoch_00002/component_0.bin") == comp0_hash);
    CHECK(file_hash(rdir + "/checkpoints/epoch_00002/trainer_moments.bin") == moments_hash);

    // A seed override lands a sibling run next to the first one.
    CliResult seeded = run_cli("train --seed 99 " + base, dir);
    CHECK(seeded.code == 0);
    const std::string rdir99 = run_dir(library_view(cfg, out, 99));
    CHECK(fs::exists(rdir99 + "/logs.csv"));
    CHECK(fs::path(rdir99).parent_path() == fs::path(rdir).parent_path());
    CHECK(fs::path(rdir99).filename().string().find("-s99") != std::string::npos);

    // eval: tables in both domains, parseable CSV, manifest
    CliResult evaled = run_cli("eval " + base, dir);
    CHECK(evaled.code == 0);
    CHECK(evaled.out.find("mode: cass") != std::string::npos);
    CHECK(evaled.out.find("maternal") != std::string::npos);
    for (const char* name : {"spectrogram", "waveform"}) {
        const std::string stem = rdir + "/eval/table_" + name;
        REQUIRE(fs::exists(stem + ".txt"));
        REQUIRE(fs::exists(stem + ".csv"));
        ErrorReport rep = parse_report_csv(slurp_or_empty(stem + ".csv"));
        CHECK(rep.component_names == std::vector<std::string>{"maternal", "fetal"});
        REQUIRE(rep.errors.size() == 2);
        for (const auto& e : rep.errors)
            for (double x : e) CHECK(x > 0.0);
    }
    CHECK(fs::exists(rdir + "/eval/eval_manifest.txt"));

    // an explicit checkpoint path works too
    CHECK(run_cli("eval --checkpoint " + rdir + "/checkpoints/epoch_00002 " + base, dir).code ==
          0);

    // cross-analysis: records + summary + one scatter per ordered pair
    CliResult crossed = run_cli("cross-analysis " + base, dir);
    CHECK(crossed.code == 0);
    CHECK(crossed.out.find("fraction judged fake") != std::string::npos);
    const std::string cdir = rdir + "/cross";
    REQUIRE(fs::exists(cdir + "/records.csv"));
    const std::string records = slurp_or_empty(cdir + "/records.csv");
    CHECK(records.rfind("source,judge,sample,output\n", 0) == 0);
    // two ordered pairs, two test records each
    CHECK(line_count(records) == 1 + 2 * 2);
    CHECK(line_count(slurp_or_empty(cdir + "/summary.txt")) == 2);
    CHECK(fs::exists(cdir + "/disc_maternal_to_fetal.svg"));
    CHECK(fs::exists(cdir + "/disc_fetal_to_maternal.svg"));

    // compare: a second mode over the same dataset, then the overlay
    const fs::path bcfg = dir / "baseline.cfg";
    write_config(bcfg, "baseline", 2);
    const std::string bbase = "--config " + bcfg.string() + " --out " + out.string();
    REQUIRE(run_cli("train " + bbase, dir).code == 0);
    REQUIRE(run_cli("eval " + bbase, dir).code == 0);
    const std::string brdir = run_dir(library_view(bcfg, out));

    const fs::path cmp = dir / "cmp";
    CliResult compared =
        run_cli("compare " + rdir + " " + brdir + " --out " + cmp.string(), dir);
    CHECK(compared.code == 0);
    CHECK(compared.out.find("(baseline)") != std::string::npos);
    CHECK(compared.out.find("(cass)") != std::string::npos);
    for (const char* comp : {"maternal", "fetal"}) {
        CHECK(fs::exists(cmp / ("compare_curve_" + std::string(comp) + ".svg")));
        CHECK(fs::exists(cmp / ("compare_curve_" + std::string(comp) + "_last2.svg")));
    }
    REQUIRE(fs::exists(cmp / "combined_table.csv"));
    const std::string combined = slurp_or_empty(cmp / "combined_table.csv");
    CHECK(combined.rfind("component,mode,l1,l2,linf\n", 0) == 0);
    CHECK(line_count(combined) == 1 + 4); // 2 components x 2 modes

    CHECK(run_cli("compare", dir).code == 2);
    CHECK(run_cli("compare " + (dir / "no_such_run").string(), dir).code == 3);
    fs::remove_all(dir);
}

TEST_CASE("cross-analysis rejects baseline configurations outright") {
    fs::path dir = fresh_dir("cass_cli_crossbase");
    const fs::path cfg = dir / "exp.cfg";
    write_config(cfg, "baseline", 2);
    CliResult r = run_cli(
        "cross-analysis --config " + cfg.string() + " --out " + (dir / "out").string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("baseline") != std::string::npos);
    fs::remove_all(dir);
}
