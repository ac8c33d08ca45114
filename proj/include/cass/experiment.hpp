#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cass/config.hpp"
#include "cass/eval.hpp"
#include "cass/io.hpp"
#include "cass/trainer.hpp"

namespace cass {

inline constexpr const char* kVersion = "0.1.0";

// Build the records described by the spec (synthesis or stem ingestion),
// including the train/test split.
StoredDataset generate_dataset(const DatasetSpec& ds);

// Model-ready views of a stored dataset: preprocessed tensors for both
// splits, the normalizer fitted on the training split, and the original test
// waveforms for waveform-domain evaluation.
struct PreparedData {
    std::vector<ModelExample> train, test;
    std::vector<EvalItem> eval_items;
    Normalizer norm;
    StftConfig stft;
    int bins = 0, frames = 0;
    std::vector<std::string> component_names;
    double sample_rate = 0.0;
    std::string dataset_id;
};

PreparedData prepare_dataset(const StoredDataset& ds, const StftConfig& stft,
                             const NormalizationSpec& norm);

// Directory conventions: datasets live under <out>/datasets keyed by the
// dataset spec hash; runs live under <out> keyed by config hash plus seed.
std::string dataset_dir(const ExperimentConfig& cfg);
std::string run_dir(const ExperimentConfig& cfg);

NetworkSpec resolve_network(const ExperimentConfig& cfg, const PreparedData& prep);
CassModel build_experiment_model(const ExperimentConfig& cfg, const PreparedData& prep);

// Train per the config. When run_dir_path is nonempty, logs.csv and periodic
// checkpoints are written there; resume continues from the newest checkpoint
// when one exists. Progress lines go to *progress when given.
std::vector<EpochLog> train_experiment(const ExperimentConfig& cfg, const PreparedData& prep,
                                       CassModel& model, const std::string& run_dir_path = "",
                                       bool resume = false, std::ostream* progress = nullptr);

// Newest checkpoint directory under run_dir_path, or "" when none exists.
std::string latest_checkpoint(const std::string& run_dir_path);

uint64_t file_hash(const std::string& path);

} // namespace cass
