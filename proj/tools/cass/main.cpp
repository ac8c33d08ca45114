#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cass/config.hpp"
#include "cass/errors.hpp"
#include "cass/eval.hpp"
#include "cass/experiment.hpp"
#include "cass/io.hpp"
#include "cass/plot.hpp"
#include "cass/trainer.hpp"

namespace fs = std::filesystem;
using namespace cass;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out;
    bool resume = false;
};

ExperimentConfig load_cfg(const GlobalOpts& g) {
    if (g.config_path.empty()) throw ArgumentError("--config is required for this command");
    ExperimentConfig cfg = load_experiment_config(g.config_path);
    if (g.seed) cfg.train.seed = *g.seed;
    if (!g.out.empty()) cfg.out_dir = g.out;
    cfg.validate();
    return cfg;
}

// The canonical dataset.* description stored next to generated data so a
// rerun can tell "same spec, skip" from "different spec, refuse".
std::string dataset_source_text(const ExperimentConfig& cfg) {
    const KvFile kv = serialize_experiment_config(cfg);
    std::string text;
    for (const auto& [k, v] : kv.items())
        if (k.rfind("dataset.", 0) == 0) text += k + " = " + v + "\n";
    return text;
}

void cmd_gen_data(const GlobalOpts& g) {
    const ExperimentConfig cfg = load_cfg(g);
    const std::string dir = dataset_dir(cfg);
    const std::string source = dataset_source_text(cfg);
    const std::string source_path = dir + "/source_config.txt";
    if (fs::exists(dir + "/manifest.txt")) {
        std::ifstream in(source_path);
        std::string existing((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
        if (in && existing == source) {
            std::cout << "dataset up to date at " << dir << "\n";
            return;
        }
        throw DataError("refusing to overwrite '" + dir + "': existing dataset was "
                        "generated from a different spec");
    }
    const StoredDataset ds = generate_dataset(cfg.dataset);
    save_dataset(dir, ds);
    std::ofstream(source_path) << source;
    std::cout << "wrote " << ds.records.size() << " records (" << ds.split.train.size()
              << " train / " << ds.split.test.size() << " test) to " << dir << "\n";
}

PreparedData load_prepared(const ExperimentConfig& cfg) {
    const std::string ddir = dataset_dir(cfg);
    if (!fs::exists(ddir + "/manifest.txt"))
        throw DataError("no dataset at '" + ddir + "'; run gen-data first");
    return prepare_dataset(load_dataset(ddir), cfg.stft, cfg.norm);
}

void add_config_echo(KvFile& manifest, const ExperimentConfig& cfg) {
    const KvFile kv = serialize_experiment_config(cfg);
    for (const auto& [k, v] : kv.items()) manifest.set("config." + k, v);
    manifest.set("config.hash", config_hash(cfg));
    manifest.set("code.version", kVersion);
}

void add_artifact(KvFile& manifest, const std::string& run, const std::string& rel) {
    manifest.set_u64("artifact." + rel, file_hash(run + "/" + rel));
}

void cmd_train(const GlobalOpts& g) {
    const ExperimentConfig cfg = load_cfg(g);
    const PreparedData prep = load_prepared(cfg);
    CassModel model = build_experiment_model(cfg, prep);
    const std::string rdir = run_dir(cfg);
    if (!g.resume && !latest_checkpoint(rdir).empty())
        throw DataError("run directory '" + rdir +
                        "' already has checkpoints; pass --resume to continue or choose "
                        "another --out");
    const auto logs = train_experiment(cfg, prep, model, rdir, g.resume, &std::cerr);

    KvFile manifest;
    add_config_echo(manifest, cfg);
    manifest.set("dataset.dir", dataset_dir(cfg));
    manifest.set_u64("dataset.manifest_hash", file_hash(dataset_dir(cfg) + "/manifest.txt"));
    add_artifact(manifest, rdir, "logs.csv");
    char ck[32];
    std::snprintf(ck, sizeof(ck), "checkpoints/epoch_%05d", logs.back().epoch);
    for (size_t i = 0; i < model.k(); ++i)
        add_artifact(manifest, rdir, std::string(ck) + "/component_" + std::to_string(i) + ".bin");
    manifest.save(rdir + "/run_manifest.txt");

    std::cout << "trained " << logs.size() << " epochs; final test relative L2:";
    for (size_t i = 0; i < prep.component_names.size(); ++i)
        std::cout << "  " << prep.component_names[i] << "=" << format_real(logs.back().test_l2[i]);
    std::cout << "\nartifacts in " << rdir << "\n";
}

CassModel load_eval_model(const ExperimentConfig& cfg, const PreparedData& prep,
                          const std::string& checkpoint) {
    std::string ck = checkpoint;
    if (ck.empty()) ck = latest_checkpoint(run_dir(cfg));
    if (ck.empty())
        throw DataError("no checkpoint under '" + run_dir(cfg) +
                        "'; train first or pass --checkpoint");
    CassModel model = checkpoint_load(ck);
    if (model.k() != prep.component_names.size())
        throw DataError("checkpoint component count does not match the dataset");
    for (size_t i = 0; i < model.k(); ++i)
        if (model.components[i].name != prep.component_names[i])
            throw DataError("checkpoint component '" + model.components[i].name +
                            "' does not match the dataset");
    return model;
}

void cmd_eval(const GlobalOpts& g, const std::string& checkpoint) {
    const ExperimentConfig cfg = load_cfg(g);
    const PreparedData prep = load_prepared(cfg);
    const CassModel model = load_eval_model(cfg, prep, checkpoint);

    const std::string evdir = run_dir(cfg) + "/eval";
    fs::create_directories(evdir);
    KvFile manifest;
    add_config_echo(manifest, cfg);
    for (const auto& [domain, name] :
         {std::pair{EvalDomain::spectrogram, std::string("spectrogram")},
          std::pair{EvalDomain::waveform, std::string("waveform")}}) {
        const ErrorReport report = evaluate_report(model, prep.eval_items, domain, prep.stft,
                                                   prep.norm, prep.dataset_id, cfg.train.seed);
        std::ofstream(evdir + "/table_" + name + ".txt") << render_table(report, TableFormat::text);
        std::ofstream(evdir + "/table_" + name + ".csv") << render_table(report, TableFormat::csv);
        add_artifact(manifest, run_dir(cfg), "eval/table_" + name + ".csv");
        std::cout << render_table(report, TableFormat::text) << "\n";
    }
    manifest.save(evdir + "/eval_manifest.txt");
}

void cmd_cross_analysis(const GlobalOpts& g, const std::string& checkpoint) {
    const ExperimentConfig cfg = load_cfg(g);
    if (cfg.train.mode == Mode::baseline)
        throw ConfigError("cross-analysis needs a cass or cass_cross run: baseline mode "
                          "trains no discriminators");
    const PreparedData prep = load_prepared(cfg);
    const CassModel model = load_eval_model(cfg, prep, checkpoint);
    const auto records = cross_discriminator_analysis(model, prep.test);

    const std::string cdir = run_dir(cfg) + "/cross";
    fs::create_directories(cdir);
    std::ofstream csv(cdir + "/records.csv");
    csv << "source,judge,sample,output\n";
    for (const auto& rec : records)
        for (size_t s = 0; s < rec.outputs.size(); ++s)
            csv << prep.component_names[rec.source_component] << ','
                << prep.component_names[rec.judge_component] << ',' << s << ','
                << format_real(rec.outputs[s]) << "\n";
    csv.close();

    std::ofstream summary(cdir + "/summary.txt");
    for (const auto& rec : records) {
        const std::string line = "D(" + prep.component_names[rec.judge_component] + ") on AE(" +
                                 prep.component_names[rec.source_component] +
                                 "): fraction judged fake = " + format_real(rec.fraction_fake);
        summary << line << "\n";
        std::cout << line << "\n";
    }
    summary.close();
    const auto plots = plot_discriminator_outputs(records, prep.component_names, cdir + "/");
    std::cout << "wrote " << plots.size() << " plots to " << cdir << "\n";
}

void cmd_compare(const GlobalOpts& g, const std::vector<std::string>& dirs) {
    if (dirs.empty()) throw ArgumentError("compare: give at least one run directory");
    const std::string out = g.out.empty() ? "compare" : g.out;
    fs::create_directories(out);

    std::vector<CurveRun> runs;
    std::vector<ErrorReport> reports;
    std::vector<std::string> component_names;
    int min_epochs = -1;
    for (const std::string& dir : dirs) {
        const KvFile manifest = KvFile::parse_file(dir + "/run_manifest.txt");
        const std::string mode = manifest.require("config.train.mode");
        LoadedLogs loaded = read_epoch_log_csv(dir + "/logs.csv");
        if (loaded.logs.empty()) throw DataError("'" + dir + "': empty epoch log");
        if (component_names.empty()) component_names = loaded.component_names;
        else if (component_names != loaded.component_names)
            throw DataError("'" + dir + "': component names differ between runs");
        std::string label = mode + " s" + manifest.get_string("config.train.seed", "?");
        runs.push_back({std::move(label), std::move(loaded.logs)});
        const int e = static_cast<int>(runs.back().logs.size());
        min_epochs = min_epochs < 0 ? e : std::min(min_epochs, e);

        const std::string table = dir + "/eval/table_spectrogram.csv";
        if (fs::exists(table)) {
            std::ifstream in(table);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            ErrorReport report = parse_report_csv(text);
            report.mode = mode;
            report.domain = "spectrogram";
            report.dataset_id = manifest.get_string("config.dataset.kind", "");
            reports.push_back(std::move(report));
        } else {
            std::cerr << "warning: " << dir << " has no eval table; omitting from the "
                      << "combined table\n";
        }
    }
    for (auto& run : runs)
        if (static_cast<int>(run.logs.size()) > min_epochs) {
            std::cerr << "warning: truncating '" << run.label << "' from " << run.logs.size()
                      << " to " << min_epochs << " epochs for the overlay\n";
            run.logs.resize(min_epochs);
        }

    const auto files =
        plot_error_curves(runs, component_names, out + "/compare_", std::min(200, min_epochs));
    if (!reports.empty()) {
        std::ofstream(out + "/combined_table.txt") << render_table(reports, TableFormat::text);
        std::ofstream(out + "/combined_table.csv") << render_table(reports, TableFormat::csv);
        std::cout << render_table(reports, TableFormat::text);
    }
    std::cout << "wrote " << files.size() << " curve plots to " << out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross adversarial source separation workbench"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "experiment config file");
    app.add_option("--seed", g.seed, "override train.seed");
    app.add_option("--out", g.out, "override out.dir (compare: output directory)");
    app.add_flag("--resume", g.resume, "resume training from the newest checkpoint");

    std::function<void()> action;

    app.add_subcommand("gen-data", "generate or ingest the dataset described by the config")
        ->callback([&] { action = [&] { cmd_gen_data(g); }; });

    app.add_subcommand("train", "train the model described by the config")
        ->callback([&] { action = [&] { cmd_train(g); }; });

    std::string checkpoint;
    auto* eval_cmd = app.add_subcommand("eval", "write error tables for a trained checkpoint");
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory (default: newest)");
    eval_cmd->callback([&] { action = [&] { cmd_eval(g, checkpoint); }; });

    auto* cross_cmd = app.add_subcommand(
        "cross-analysis", "judge each component's output with the other discriminators");
    cross_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory (default: newest)");
    cross_cmd->callback([&] { action = [&] { cmd_cross_analysis(g, checkpoint); }; });

    std::vector<std::string> compare_dirs;
    auto* compare_cmd =
        app.add_subcommand("compare", "overlay several runs' curves and combine their tables");
    compare_cmd->add_option("dirs", compare_dirs, "run directories");
    compare_cmd->callback([&] { action = [&] { cmd_compare(g, compare_dirs); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
