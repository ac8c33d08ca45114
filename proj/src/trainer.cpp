#include "cass/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cass/errors.hpp"
#include "cass/eval.hpp"
#include "cass/io.hpp"

namespace cass {

void TrainConfig::validate() const {
    if (lr_ae <= 0.0 || lr_disc <= 0.0) throw ConfigError("train: learning rates must be positive");
    if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
    if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
    if (eval_every < 1) throw ConfigError("train: eval_every must be at least 1");
    if (checkpoint_every < 0) throw ConfigError("train: checkpoint_every must be nonnegative");
}

std::vector<double> evaluate_epoch(const CassModel& model, const std::vector<ModelExample>& test) {
    if (test.empty()) throw ArgumentError("evaluate: empty test split");
    std::vector<double> err(model.components.size(), 0.0);
    for (const ModelExample& ex : test) {
        for (size_t i = 0; i < model.components.size(); ++i) {
            const Tensor recon = model.components[i].reconstruct(ex.mixture);
            err[i] += relative_error(recon, ex.targets[i], NormOrder::l2);
        }
    }
    for (double& e : err) e /= static_cast<double>(test.size());
    return err;
}

Trainer::Trainer(CassModel& model, std::vector<ModelExample> train, std::vector<ModelExample> test,
                 TrainConfig cfg)
    : model_(model), train_(std::move(train)), test_(std::move(test)), cfg_(cfg),
      rng_(Rng(cfg.seed).split(0x7261)) {
    cfg_.validate();
    if (cfg_.mode != model_.mode)
        throw ConfigError("train: config mode disagrees with the model's mode");
    if (train_.empty()) throw ArgumentError("train: empty training split");
    if (test_.empty()) throw ArgumentError("train: empty test split");
    for (const auto& ex : train_)
        if (ex.targets.size() != model_.k())
            throw DataError("train: example component count does not match the model");
    if (model_.mode == Mode::cass_cross)
        for (size_t j = 0; j < model_.k(); ++j)
            model_.weights.cross_weight_for(j == 0 ? 1 : 0, j); // all weights present
    for (auto& c : model_.components) {
        ae_opt_.emplace_back(c.autoencoder_params(), AdamConfig{cfg_.lr_ae, 0.9, 0.999, 1e-8});
        disc_opt_.emplace_back(c.discriminator_params(),
                               AdamConfig{cfg_.lr_disc, 0.9, 0.999, 1e-8});
    }
}

EpochLog Trainer::train_epoch(int epoch) {
    const size_t n = train_.size();
    const size_t k = model_.k();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    for (size_t i = n - 1; i > 0; --i) {
        const size_t j = rng_.uniform_int(i + 1);
        std::swap(order[i], order[j]);
    }

    // Which opponents any discriminator will actually judge this run.
    std::vector<bool> cross_needed(k, false);
    bool any_cross = false;
    if (model_.mode == Mode::cass_cross)
        for (size_t j = 0; j < k; ++j) {
            cross_needed[j] = model_.weights.cross_weights.at(j) > 0.0;
            any_cross = any_cross || cross_needed[j];
        }

    std::vector<double> ae_sum(k, 0.0), disc_sum(k, 0.0);
    size_t batches = 0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg_.batch_size)) {
        const size_t end = std::min(n, start + static_cast<size_t>(cfg_.batch_size));
        Batch batch;
        for (size_t b = start; b < end; ++b) batch.push_back(&train_[order[b]]);

        // Opponent outputs frozen at the start of the minibatch.
        CrossFakes fakes;
        if (any_cross) {
            fakes.resize(k);
            for (size_t j = 0; j < k; ++j) {
                if (!cross_needed[j]) continue;
                fakes[j].reserve(batch.size());
                for (const ModelExample* ex : batch)
                    fakes[j].push_back(model_.components[j].reconstruct(ex->mixture));
            }
        }

        for (size_t i = 0; i < k; ++i) {
            ae_opt_[i].zero_grad();
            const double la = ae_objective(model_, i, batch);
            if (!std::isfinite(la))
                throw NumericError("non-finite autoencoder loss at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(batches) +
                                   ", component " + model_.components[i].name);
            ae_opt_[i].step();
            ae_sum[i] += la;

            if (model_.mode == Mode::baseline) continue;
            disc_opt_[i].zero_grad();
            const double ld = model_.mode == Mode::cass_cross
                                  ? disc_objective_cross(model_, i, batch,
                                                         any_cross ? &fakes : nullptr)
                                  : disc_objective(model_, i, batch);
            if (!std::isfinite(ld))
                throw NumericError("non-finite discriminator loss at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(batches) +
                                   ", component " + model_.components[i].name);
            disc_opt_[i].step();
            disc_sum[i] += ld;
        }
        ++batches;
    }

    EpochLog log;
    log.epoch = epoch;
    for (size_t i = 0; i < k; ++i) {
        log.ae_loss.push_back(ae_sum[i] / static_cast<double>(batches));
        log.disc_loss.push_back(model_.mode == Mode::baseline
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : disc_sum[i] / static_cast<double>(batches));
    }
    if (epoch % cfg_.eval_every == 0 || epoch == cfg_.epochs || last_eval_.empty())
        last_eval_ = evaluate_epoch(model_, test_);
    log.test_l2 = last_eval_;
    return log;
}

void Trainer::run(const std::function<void(const EpochLog&)>& on_epoch) {
    for (int e = completed_ + 1; e <= cfg_.epochs; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochLog log = train_epoch(e);
        log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        logs_.push_back(std::move(log));
        completed_ = e;
        if (on_epoch) on_epoch(logs_.back());
    }
}

void write_epoch_log_csv(const std::string& path, const std::vector<EpochLog>& logs,
                         const std::vector<std::string>& component_names) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << "epoch,component,test_l2,ae_loss,disc_loss,seconds\n";
    for (const EpochLog& log : logs)
        for (size_t i = 0; i < component_names.size(); ++i)
            out << log.epoch << ',' << component_names[i] << ',' << format_real(log.test_l2[i])
                << ',' << format_real(log.ae_loss[i]) << ',' << format_real(log.disc_loss[i])
                << ',' << format_real(log.seconds) << '\n';
    if (!out) throw DataError("write failed on '" + path + "'");
}

LoadedLogs read_epoch_log_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "epoch,component,test_l2,ae_loss,disc_loss,seconds")
        throw DataError("'" + path + "': not an epoch log CSV");
    LoadedLogs out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw DataError("'" + path + "' line " + std::to_string(lineno) + ": bad row");
        const int epoch = std::stoi(fields[0]);
        if (out.logs.empty() || out.logs.back().epoch != epoch) {
            out.logs.push_back(EpochLog{});
            out.logs.back().epoch = epoch;
        }
        EpochLog& log = out.logs.back();
        if (static_cast<int>(out.logs.size()) == 1) out.component_names.push_back(fields[1]);
        log.test_l2.push_back(std::strtod(fields[2].c_str(), nullptr));
        log.ae_loss.push_back(std::strtod(fields[3].c_str(), nullptr));
        log.disc_loss.push_back(std::strtod(fields[4].c_str(), nullptr));
        log.seconds = std::strtod(fields[5].c_str(), nullptr);
    }
    return out;
}

void Trainer::save_state(const std::string& dir) {
    checkpoint_save(model_, dir);

    KvFile st;
    st.set_int("state.completed_epochs", completed_);
    st.set_u64("state.rng", rng_.state());
    st.set_real_list("state.last_eval", last_eval_);
    NamedArrays moments;
    for (size_t i = 0; i < model_.k(); ++i) {
        st.set_int("state.adam.ae." + std::to_string(i) + ".t", ae_opt_[i].steps());
        st.set_int("state.adam.disc." + std::to_string(i) + ".t", disc_opt_[i].steps());
        const auto collect = [&moments](const Adam& opt, const std::string& prefix) {
            const auto& params = opt.params();
            for (size_t p = 0; p < params.size(); ++p) {
                moments.entries.emplace_back(prefix + ".m." + params[p]->name, opt.moment1()[p]);
                moments.entries.emplace_back(prefix + ".v." + params[p]->name, opt.moment2()[p]);
            }
        };
        collect(ae_opt_[i], "ae." + std::to_string(i));
        collect(disc_opt_[i], "disc." + std::to_string(i));
    }
    for (const EpochLog& log : logs_) {
        const std::string p = "state.log." + std::to_string(log.epoch);
        st.set_real_list(p + ".test_l2", log.test_l2);
        st.set_real_list(p + ".ae_loss", log.ae_loss);
        st.set_real_list(p + ".disc_loss", log.disc_loss);
        st.set_real(p + ".seconds", log.seconds);
    }
    st.save(dir + "/trainer_state.txt");
    write_named_arrays(dir + "/trainer_moments.bin", "CCKP", moments, Dtype::f64);
}

void Trainer::load_state(const std::string& dir) {
    checkpoint_load_into(model_, dir);
    const KvFile st = KvFile::parse_file(dir + "/trainer_state.txt");
    const NamedArrays moments = read_named_arrays(dir + "/trainer_moments.bin", "CCKP");

    completed_ = static_cast<int>(st.require_int("state.completed_epochs"));
    rng_.set_state(st.get_u64("state.rng", 0));
    last_eval_.clear();
    if (st.has("state.last_eval")) last_eval_ = st.get_real_list("state.last_eval");

    for (size_t i = 0; i < model_.k(); ++i) {
        const auto restore = [&moments, &st](Adam& opt, const std::string& prefix,
                                             const std::string& tkey) {
            std::vector<Tensor> m, v;
            for (const Param* p : opt.params()) {
                m.push_back(moments.require(prefix + ".m." + p->name));
                v.push_back(moments.require(prefix + ".v." + p->name));
            }
            opt.restore(st.require_int(tkey), std::move(m), std::move(v));
        };
        restore(ae_opt_[i], "ae." + std::to_string(i),
                "state.adam.ae." + std::to_string(i) + ".t");
        restore(disc_opt_[i], "disc." + std::to_string(i),
                "state.adam.disc." + std::to_string(i) + ".t");
    }

    logs_.clear();
    for (int e = 1; e <= completed_; ++e) {
        const std::string p = "state.log." + std::to_string(e);
        if (!st.has(p + ".test_l2")) continue;
        EpochLog log;
        log.epoch = e;
        log.test_l2 = st.get_real_list(p + ".test_l2");
        log.ae_loss = st.get_real_list(p + ".ae_loss");
        log.disc_loss = st.get_real_list(p + ".disc_loss");
        log.seconds = st.get_real(p + ".seconds", 0.0);
        logs_.push_back(std::move(log));
    }
}

} // namespace cass
