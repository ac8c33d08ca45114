#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cass/losses.hpp"
#include "cass/model.hpp"
#include "cass/optim.hpp"
#include "cass/rng.hpp"
#include "cass/spectro.hpp"

namespace cass {

struct TrainConfig {
    double lr_ae = 1e-5;
    double lr_disc = 1e-6;
    int batch_size = 50;
    int epochs = 500;
    uint64_t seed = 0;
    Mode mode = Mode::cass;
    int eval_every = 1;
    int checkpoint_every = 0; // 0: checkpoint only when asked / at the end

    void validate() const;
};

struct EpochLog {
    int epoch = 0;                 // 1-based
    std::vector<double> test_l2;   // per component, mean relative L2 on magnitudes
    std::vector<double> ae_loss;   // per component, mean over minibatches
    std::vector<double> disc_loss; // per component; NaN in baseline mode
    double seconds = 0.0;
};

// Mean over the test split of |AE_i(X) - X_i|_2 / |X_i|_2 on spectrogram
// magnitudes, per component.
std::vector<double> evaluate_epoch(const CassModel& model, const std::vector<ModelExample>& test);

void write_epoch_log_csv(const std::string& path, const std::vector<EpochLog>& logs,
                         const std::vector<std::string>& component_names);

struct LoadedLogs {
    std::vector<EpochLog> logs;
    std::vector<std::string> component_names;
};
LoadedLogs read_epoch_log_csv(const std::string& path);

// Alternating optimization over all components: per minibatch, in component
// index order, one autoencoder step then (outside baseline mode) one
// discriminator step. Cross-mode discriminator steps judge opponents from a
// snapshot taken at the start of the minibatch. Deterministic given the seed.
class Trainer {
  public:
    Trainer(CassModel& model, std::vector<ModelExample> train, std::vector<ModelExample> test,
            TrainConfig cfg);

    // Runs from the current epoch up to cfg.epochs; on_epoch (optional) fires
    // after each epoch with the freshly appended log entry.
    void run(const std::function<void(const EpochLog&)>& on_epoch = {});

    int completed_epochs() const { return completed_; }
    const std::vector<EpochLog>& logs() const { return logs_; }
    CassModel& model() { return model_; }

    // Full training state (parameters, optimizer moments, shuffle RNG, logs);
    // restoring and continuing reproduces an uninterrupted run exactly.
    void save_state(const std::string& dir);
    void load_state(const std::string& dir);

  private:
    EpochLog train_epoch(int epoch);

    CassModel& model_;
    std::vector<ModelExample> train_, test_;
    TrainConfig cfg_;
    std::vector<Adam> ae_opt_, disc_opt_;
    Rng rng_;
    int completed_ = 0;
    std::vector<EpochLog> logs_;
    std::vector<double> last_eval_;
};

} // namespace cass
