#include "cass/config.hpp"

#include <sstream>

#include "cass/errors.hpp"

namespace cass {

void DatasetSpec::validate() const {
    if (kind != "ecg" && kind != "ppg" && kind != "audio" && kind != "harmonic")
        throw ConfigError("dataset: unknown kind '" + kind + "'");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("dataset: train_fraction must lie strictly between 0 and 1");
    if (kind == "audio") {
        if (stems.size() < 2) throw ConfigError("dataset: audio needs at least two stem paths");
        if (segment_length < 16) throw ConfigError("dataset: segment_length too small");
    } else {
        if (n < 2) throw ConfigError("dataset: need at least two records");
        if (sample_rate < 0.0 || duration < 0.0)
            throw ConfigError("dataset: sample_rate and duration must be nonnegative");
    }
}

double DatasetSpec::resolved_sample_rate() const {
    if (sample_rate > 0.0) return sample_rate;
    if (kind == "ecg") return 500.0;
    if (kind == "ppg") return 125.0;
    if (kind == "harmonic") return 8000.0;
    return 0.0; // audio: taken from the WAV files
}

double DatasetSpec::resolved_duration() const {
    if (duration > 0.0) return duration;
    if (kind == "ecg" || kind == "ppg") return 2.0;
    if (kind == "harmonic") return 0.5;
    return 0.0;
}

void ExperimentConfig::validate() const {
    dataset.validate();
    stft.validate();
    if (norm.kind != "peak" && norm.kind != "none")
        throw ConfigError("norm: kind must be 'peak' or 'none'");
    // The network's input shape is data-dependent; validate the rest.
    NetworkSpec probe = network;
    probe.input_bins = stft.fft_size / 2 + 1;
    probe.input_frames = probe.input_bins; // placeholder spatial extent
    probe.latent_dim = network.latent_dim;
    if (network.latent_dim <= 0) throw ConfigError("network: latent_dim must be positive");
    probe.validate();
    train.validate();
    if (loss_alpha < 0.0 || loss_beta < 0.0 || loss_cross < 0.0)
        throw ConfigError("loss: weights must be nonnegative");
    LossWeights w;
    w.alpha = loss_alpha;
    w.beta = loss_beta;
    w.validate();
    if (out_dir.empty()) throw ConfigError("out: directory must be nonempty");
}

ExperimentConfig parse_experiment_config(const KvFile& kv) {
    ExperimentConfig c;
    c.dataset.kind = kv.get_string("dataset.kind", c.dataset.kind);
    c.dataset.n = static_cast<int>(kv.get_int("dataset.n", c.dataset.n));
    c.dataset.seed = kv.get_u64("dataset.seed", c.dataset.seed);
    c.dataset.train_fraction = kv.get_real("dataset.train_fraction", c.dataset.train_fraction);
    c.dataset.sample_rate = kv.get_real("dataset.sample_rate", c.dataset.sample_rate);
    c.dataset.duration = kv.get_real("dataset.duration", c.dataset.duration);
    if (kv.has("dataset.stems")) c.dataset.stems = kv.get_list("dataset.stems");
    c.dataset.mixture_path = kv.get_string("dataset.mixture", "");
    c.dataset.segment_length =
        static_cast<int>(kv.get_int("dataset.segment_length", c.dataset.segment_length));

    c.stft.window_length = static_cast<int>(kv.get_int("stft.window_length", c.stft.window_length));
    c.stft.hop_length = static_cast<int>(kv.get_int("stft.hop_length", c.stft.hop_length));
    c.stft.fft_size = static_cast<int>(kv.get_int("stft.fft_size", c.stft.fft_size));
    c.stft.window_kind = kv.get_string("stft.window", c.stft.window_kind);

    c.norm.kind = kv.get_string("norm.kind", c.norm.kind);

    c.network.latent_dim = static_cast<int>(kv.get_int("network.latent_dim", c.network.latent_dim));
    if (kv.has("network.channels")) c.network.channels = kv.get_int_list("network.channels");
    c.network.block_count = static_cast<int>(c.network.channels.size());
    if (kv.has("network.block_count") &&
        kv.require_int("network.block_count") != c.network.block_count)
        throw ConfigError("network.block_count must match the channel schedule length");
    c.network.nonlinearity = kv.get_string("network.nonlinearity", c.network.nonlinearity);

    c.train.mode = parse_mode(kv.get_string("train.mode", mode_name(c.train.mode)));
    c.train.epochs = static_cast<int>(kv.get_int("train.epochs", c.train.epochs));
    c.train.batch_size = static_cast<int>(kv.get_int("train.batch_size", c.train.batch_size));
    c.train.lr_ae = kv.get_real("train.lr_ae", c.train.lr_ae);
    c.train.lr_disc = kv.get_real("train.lr_disc", c.train.lr_disc);
    c.train.eval_every = static_cast<int>(kv.get_int("train.eval_every", c.train.eval_every));
    c.train.checkpoint_every =
        static_cast<int>(kv.get_int("train.checkpoint_every", c.train.checkpoint_every));
    c.train.seed = kv.get_u64("train.seed", c.train.seed);

    c.loss_alpha = kv.get_real("loss.alpha", c.loss_alpha);
    c.loss_beta = kv.get_real("loss.beta", c.loss_beta);
    c.loss_cross = kv.get_real("loss.cross_weight", c.loss_cross);
    c.out_dir = kv.get_string("out.dir", c.out_dir);

    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(KvFile::parse_file(path));
}

KvFile serialize_experiment_config(const ExperimentConfig& c) {
    KvFile kv;
    kv.set("dataset.kind", c.dataset.kind);
    kv.set_int("dataset.n", c.dataset.n);
    kv.set_u64("dataset.seed", c.dataset.seed);
    kv.set_real("dataset.train_fraction", c.dataset.train_fraction);
    kv.set_real("dataset.sample_rate", c.dataset.sample_rate);
    kv.set_real("dataset.duration", c.dataset.duration);
    if (!c.dataset.stems.empty()) kv.set_list("dataset.stems", c.dataset.stems);
    if (!c.dataset.mixture_path.empty()) kv.set("dataset.mixture", c.dataset.mixture_path);
    kv.set_int("dataset.segment_length", c.dataset.segment_length);

    kv.set_int("stft.window_length", c.stft.window_length);
    kv.set_int("stft.hop_length", c.stft.hop_length);
    kv.set_int("stft.fft_size", c.stft.fft_size);
    kv.set("stft.window", c.stft.window_kind);

    kv.set("norm.kind", c.norm.kind);

    kv.set_int("network.latent_dim", c.network.latent_dim);
    kv.set_int_list("network.channels", c.network.channels);
    kv.set_int("network.block_count", static_cast<int>(c.network.channels.size()));
    kv.set("network.nonlinearity", c.network.nonlinearity);

    kv.set("train.mode", mode_name(c.train.mode));
    kv.set_int("train.epochs", c.train.epochs);
    kv.set_int("train.batch_size", c.train.batch_size);
    kv.set_real("train.lr_ae", c.train.lr_ae);
    kv.set_real("train.lr_disc", c.train.lr_disc);
    kv.set_int("train.eval_every", c.train.eval_every);
    kv.set_int("train.checkpoint_every", c.train.checkpoint_every);
    kv.set_u64("train.seed", c.train.seed);

    kv.set_real("loss.alpha", c.loss_alpha);
    kv.set_real("loss.beta", c.loss_beta);
    kv.set_real("loss.cross_weight", c.loss_cross);
    kv.set("out.dir", c.out_dir);
    return kv;
}

namespace {

bool is_seed_key(const std::string& key) {
    return key == "seed" || (key.size() > 5 && key.compare(key.size() - 5, 5, ".seed") == 0);
}

} // namespace

std::string config_hash(const ExperimentConfig& cfg) {
    const KvFile kv = serialize_experiment_config(cfg);
    std::string text;
    for (const auto& [k, v] : kv.items()) {
        if (is_seed_key(k)) continue;
        text += k + "=" + v + "\n";
    }
    return short_hash(text);
}

std::string dataset_hash(const DatasetSpec& ds) {
    ExperimentConfig probe;
    probe.dataset = ds;
    const KvFile kv = serialize_experiment_config(probe);
    std::string text;
    for (const auto& [k, v] : kv.items())
        if (k.rfind("dataset.", 0) == 0) text += k + "=" + v + "\n";
    return short_hash(text);
}

LossWeights make_weights(const ExperimentConfig& cfg, size_t k) {
    LossWeights w;
    w.alpha = cfg.loss_alpha;
    w.beta = cfg.loss_beta;
    if (cfg.train.mode == Mode::cass_cross)
        for (size_t j = 0; j < k; ++j) w.cross_weights[j] = cfg.loss_cross;
    w.validate();
    return w;
}

} // namespace cass
