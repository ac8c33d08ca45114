#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cass/io.hpp"
#include "cass/model.hpp"
#include "cass/spectro.hpp"
#include "cass/trainer.hpp"
#include "cass/weights.hpp"

namespace cass {

// What data the experiment runs on. For synthetic kinds (ecg, ppg, harmonic)
// records are generated from the seed; the audio kind segments WAV stems.
struct DatasetSpec {
    std::string kind = "ecg"; // ecg | ppg | audio | harmonic
    int n = 100;              // synthetic record count
    uint64_t seed = 1;
    double train_fraction = 0.8;
    double sample_rate = 0.0; // 0: kind default
    double duration = 0.0;    // 0: kind default
    std::vector<std::string> stems;
    std::string mixture_path;
    int segment_length = 16384;

    void validate() const;
    double resolved_sample_rate() const;
    double resolved_duration() const;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    StftConfig stft;
    NormalizationSpec norm;
    NetworkSpec network; // input_bins/input_frames are derived from data at run time
    TrainConfig train;
    double loss_alpha = 0.9;
    double loss_beta = 0.1;
    double loss_cross = 0.01; // uniform opponent weight in cass_cross mode
    std::string out_dir = "runs";

    void validate() const;
};

ExperimentConfig parse_experiment_config(const KvFile& kv);
ExperimentConfig load_experiment_config(const std::string& path);
KvFile serialize_experiment_config(const ExperimentConfig& cfg);

// Hash of the canonical serialization with seed keys excluded, so runs that
// differ only by seed share a prefix and land side by side.
std::string config_hash(const ExperimentConfig& cfg);
// Hash of the dataset.* subset only (seed included: a different seed is a
// different dataset).
std::string dataset_hash(const DatasetSpec& ds);

LossWeights make_weights(const ExperimentConfig& cfg, size_t k);

} // namespace cass
