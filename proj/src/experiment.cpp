#include "cass/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "cass/errors.hpp"
#include "cass/synthgen.hpp"

namespace fs = std::filesystem;

namespace cass {

namespace {

std::string stem_label(const std::string& path) {
    std::string base = fs::path(path).stem().string();
    std::string out;
    for (char c : base)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
    return out.empty() ? "stem" : out;
}

std::vector<std::string> stem_labels(const std::vector<std::string>& paths) {
    std::vector<std::string> names;
    for (const auto& p : paths) {
        std::string name = stem_label(p);
        int suffix = 2;
        while (std::find(names.begin(), names.end(), name) != names.end())
            name = stem_label(p) + "_" + std::to_string(suffix++);
        names.push_back(name);
    }
    return names;
}

} // namespace

StoredDataset generate_dataset(const DatasetSpec& ds) {
    ds.validate();
    StoredDataset out;
    out.kind = ds.kind;
    out.seed = ds.seed;
    if (ds.kind == "ecg") {
        EcgDatasetOptions opt;
        opt.sample_rate = ds.resolved_sample_rate();
        opt.duration = ds.resolved_duration();
        out.records = make_ecg_dataset(ds.n, ds.seed, opt);
        out.component_names = {"maternal", "fetal"};
        out.sample_rate = opt.sample_rate;
    } else if (ds.kind == "ppg") {
        PpgDatasetOptions opt;
        opt.sample_rate = ds.resolved_sample_rate();
        opt.duration = ds.resolved_duration();
        out.records = make_ppg_dataset(ds.n, ds.seed, opt);
        out.component_names = {"heartbeat", "respiratory"};
        out.sample_rate = opt.sample_rate;
    } else if (ds.kind == "harmonic") {
        HarmonicDatasetOptions opt;
        opt.sample_rate = ds.resolved_sample_rate();
        opt.duration = ds.resolved_duration();
        out.records = make_harmonic_dataset(ds.n, ds.seed, opt);
        out.component_names = {"low", "high"};
        out.sample_rate = opt.sample_rate;
    } else { // audio
        out.records = ingest_audio_stems(ds.stems, ds.mixture_path,
                                         static_cast<size_t>(ds.segment_length));
        out.component_names = stem_labels(ds.stems);
        if (out.records.empty()) throw DataError("audio ingestion produced no segments");
        out.sample_rate = out.records.front().mixture.sample_rate;
        if (out.records.size() < 2)
            throw DataError("audio ingestion produced fewer than two segments; "
                            "shorten segment_length or provide longer stems");
    }
    out.split = split_dataset(out.records.size(), ds.train_fraction, ds.seed);
    return out;
}

PreparedData prepare_dataset(const StoredDataset& ds, const StftConfig& stft,
                             const NormalizationSpec& norm) {
    stft.validate();
    if (ds.records.empty()) throw DataError("dataset has no records");
    if (ds.split.train.empty() || ds.split.test.empty())
        throw DataError("dataset split leaves a side empty");
    for (size_t idx : ds.split.train)
        if (idx >= ds.records.size()) throw DataError("split index out of range");
    for (size_t idx : ds.split.test)
        if (idx >= ds.records.size()) throw DataError("split index out of range");

    PreparedData prep;
    prep.stft = stft;
    prep.component_names = ds.component_names;
    prep.sample_rate = ds.sample_rate;
    prep.dataset_id =
        ds.kind + "-n" + std::to_string(ds.records.size()) + "-s" + std::to_string(ds.seed);

    std::vector<MixtureExample> train_records;
    for (size_t idx : ds.split.train) train_records.push_back(ds.records[idx]);
    prep.norm = fit_normalizer(norm, train_records, stft);

    for (const MixtureExample& r : train_records) prep.train.push_back(preprocess(r, stft, prep.norm));
    for (size_t idx : ds.split.test) {
        const MixtureExample& r = ds.records[idx];
        EvalItem item;
        item.prepared = preprocess(r, stft, prep.norm);
        item.truth = r.components;
        prep.test.push_back(item.prepared);
        prep.eval_items.push_back(std::move(item));
    }

    prep.bins = prep.train.front().mixture.shape[0];
    prep.frames = prep.train.front().mixture.shape[1];
    for (const auto& ex : prep.train)
        if (ex.mixture.shape != std::vector<int>{prep.bins, prep.frames})
            throw DataError("records produce differing spectrogram shapes");
    for (const auto& ex : prep.test)
        if (ex.mixture.shape != std::vector<int>{prep.bins, prep.frames})
            throw DataError("records produce differing spectrogram shapes");
    return prep;
}

std::string dataset_dir(const ExperimentConfig& cfg) {
    return cfg.out_dir + "/datasets/" + cfg.dataset.kind + "-" + dataset_hash(cfg.dataset);
}

std::string run_dir(const ExperimentConfig& cfg) {
    return cfg.out_dir + "/" + config_hash(cfg) + "-s" + std::to_string(cfg.train.seed);
}

NetworkSpec resolve_network(const ExperimentConfig& cfg, const PreparedData& prep) {
    NetworkSpec spec = cfg.network;
    spec.input_bins = prep.bins;
    spec.input_frames = prep.frames;
    spec.block_count = static_cast<int>(spec.channels.size());
    spec.validate();
    return spec;
}

CassModel build_experiment_model(const ExperimentConfig& cfg, const PreparedData& prep) {
    return build_model(prep.component_names, resolve_network(cfg, prep), cfg.train.mode,
                       make_weights(cfg, prep.component_names.size()), cfg.train.seed);
}

std::string latest_checkpoint(const std::string& run_dir_path) {
    const fs::path base = fs::path(run_dir_path) / "checkpoints";
    if (!fs::exists(base)) return "";
    int best = -1;
    fs::path best_path;
    for (const auto& entry : fs::directory_iterator(base)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("epoch_", 0) != 0) continue;
        const int e = std::atoi(name.c_str() + 6);
        if (e > best && fs::exists(entry.path() / "trainer_state.txt")) {
            best = e;
            best_path = entry.path();
        }
    }
    return best < 0 ? "" : best_path.string();
}

namespace {

std::string checkpoint_dir_for(const std::string& run_dir_path, int epoch) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "epoch_%05d", epoch);
    return run_dir_path + "/checkpoints/" + buf;
}

} // namespace

std::vector<EpochLog> train_experiment(const ExperimentConfig& cfg, const PreparedData& prep,
                                       CassModel& model, const std::string& run_dir_path,
                                       bool resume, std::ostream* progress) {
    Trainer trainer(model, prep.train, prep.test, cfg.train);
    if (!run_dir_path.empty()) {
        fs::create_directories(run_dir_path);
        if (resume) {
            const std::string ck = latest_checkpoint(run_dir_path);
            if (!ck.empty()) {
                trainer.load_state(ck);
                if (progress)
                    *progress << "resuming from " << ck << " (epoch "
                              << trainer.completed_epochs() << ")\n";
            }
        }
    }

    const std::string csv = run_dir_path.empty() ? "" : run_dir_path + "/logs.csv";
    trainer.run([&](const EpochLog& log) {
        if (progress) {
            *progress << "epoch " << log.epoch << "/" << cfg.train.epochs;
            for (size_t i = 0; i < prep.component_names.size(); ++i)
                *progress << "  " << prep.component_names[i] << " l2=" << log.test_l2[i];
            *progress << "\n";
        }
        if (run_dir_path.empty()) return;
        write_epoch_log_csv(csv, trainer.logs(), prep.component_names);
        if (cfg.train.checkpoint_every > 0 && log.epoch % cfg.train.checkpoint_every == 0 &&
            log.epoch != cfg.train.epochs)
            trainer.save_state(checkpoint_dir_for(run_dir_path, log.epoch));
    });

    if (!run_dir_path.empty()) {
        write_epoch_log_csv(csv, trainer.logs(), prep.component_names);
        trainer.save_state(checkpoint_dir_for(run_dir_path, trainer.completed_epochs()));
    }
    return trainer.logs();
}

uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(data);
}

} // namespace cass
