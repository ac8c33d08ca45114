#include <doctest.h>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cass/config.hpp"
#include "cass/errors.hpp"
#include "cass/experiment.hpp"
#include "cass/io.hpp"

using namespace cass;
namespace fs = std::filesystem;

namespace {

ExperimentConfig nondefault_config() {
    ExperimentConfig c;
    c.dataset.kind = "ppg";
    c.dataset.n = 24;
    c.dataset.seed = 9;
    c.dataset.train_fraction = 0.75;
    c.dataset.sample_rate = 64.0;
    c.dataset.duration = 1.5;
    c.stft.window_length = 32;
    c.stft.hop_length = 8;
    c.stft.fft_size = 32;
    c.stft.window_kind = "hann";
    c.norm.kind = "none";
    c.network.latent_dim = 12;
    c.network.channels = {4, 6};
    c.network.block_count = 2;
    c.train.mode = Mode::cass_cross;
    c.train.epochs = 7;
    c.train.batch_size = 5;
    c.train.lr_ae = 2e-4;
    c.train.lr_disc = 3e-5;
    c.train.eval_every = 2;
    c.train.checkpoint_every = 3;
    c.train.seed = 77;
    c.loss_alpha = 0.8;
    c.loss_beta = 0.2;
    c.loss_cross = 0.05;
    c.out_dir = "scratch";
    return c;
}

bool is_hex8(const std::string& s) {
    if (s.size() != 8) return false;
    for (char ch : s)
        if (!std::isxdigit(static_cast<unsigned char>(ch)) ||
            (std::isalpha(static_cast<unsigned char>(ch)) &&
             !std::islower(static_cast<unsigned char>(ch))))
            return false;
    return true;
}

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("dataset defaults resolve per kind") {
    DatasetSpec ds;
    ds.kind = "ecg";
    CHECK(ds.resolved_sample_rate() == 500.0);
    CHECK(ds.resolved_duration() == 2.0);
    ds.kind = "ppg";
    CHECK(ds.resolved_sample_rate() == 125.0);
    CHECK(ds.resolved_duration() == 2.0);
    ds.kind = "harmonic";
    CHECK(ds.resolved_sample_rate() == 8000.0);
    CHECK(ds.resolved_duration() == 0.5);
    ds.kind = "audio";
    CHECK(ds.resolved_sample_rate() == 0.0); // taken from the stems
    CHECK(ds.resolved_duration() == 0.0);

    ds.kind = "ecg";
    ds.sample_rate = 250.0;
    ds.duration = 4.0;
    CHECK(ds.resolved_sample_rate() == 250.0);
    CHECK(ds.resolved_duration() == 4.0);
}

TEST_CASE("dataset validation flags bad kinds, fractions and sizes") {
    DatasetSpec ds;
    ds.kind = "eeg";
    CHECK_THROWS_AS(ds.validate(), ConfigError);
    ds.kind = "ecg";
    ds.train_fraction = 1.0;
    CHECK_THROWS_AS(ds.validate(), ConfigError);
    ds.train_fraction = 0.0;
    CHECK_THROWS_AS(ds.validate(), ConfigError);
    ds.train_fraction = 0.8;
    ds.n = 1;
    CHECK_THROWS_AS(ds.validate(), ConfigError);
    ds.n = 10;
    ds.sample_rate = -1.0;
    CHECK_THROWS_AS(ds.validate(), ConfigError);
    ds.sample_rate = 0.0;
    CHECK_NOTHROW(ds.validate());

    DatasetSpec audio;
    audio.kind = "audio";
    audio.stems = {"a.wav"};
    CHECK_THROWS_AS(audio.validate(), ConfigError); // needs two stems
    audio.stems = {"a.wav", "b.wav"};
    audio.segment_length = 8;
    CHECK_THROWS_AS(audio.validate(), ConfigError);
    audio.segment_length = 1024;
    CHECK_NOTHROW(audio.validate());
}

TEST_CASE("experiment config round-trips through its serialized form") {
    const ExperimentConfig c = nondefault_config();
    const ExperimentConfig back = parse_experiment_config(serialize_experiment_config(c));

    CHECK(back.dataset.kind == c.dataset.kind);
    CHECK(back.dataset.n == c.dataset.n);
    CHECK(back.dataset.seed == c.dataset.seed);
    CHECK(back.dataset.train_fraction == c.dataset.train_fraction);
    CHECK(back.dataset.sample_rate == c.dataset.sample_rate);
    CHECK(back.dataset.duration == c.dataset.duration);
    CHECK(back.dataset.segment_length == c.dataset.segment_length);
    CHECK(back.stft.window_length == c.stft.window_length);
    CHECK(back.stft.hop_length == c.stft.hop_length);
    CHECK(back.stft.fft_size == c.stft.fft_size);
    CHECK(back.stft.window_kind == c.stft.window_kind);
    CHECK(back.norm.kind == c.norm.kind);
    CHECK(back.network.latent_dim == c.network.latent_dim);
    CHECK(back.network.channels == c.network.channels);
    CHECK(back.network.block_count == c.network.block_count);
    CHECK(back.train.mode == c.train.mode);
    CHECK(back.train.epochs == c.train.epochs);
    CHECK(back.train.batch_size == c.train.batch_size);
    CHECK(back.train.lr_ae == c.train.lr_ae);
    CHECK(back.train.lr_disc == c.train.lr_disc);
    CHECK(back.train.eval_every == c.train.eval_every);
    CHECK(back.train.checkpoint_every == c.train.checkpoint_every);
    CHECK(back.train.seed == c.train.seed);
    CHECK(back.loss_alpha == c.loss_alpha);
    CHECK(back.loss_beta == c.loss_beta);
    CHECK(back.loss_cross == c.loss_cross);
    CHECK(back.out_dir == c.out_dir);

    // The canonical text form is a fixed point.
    CHECK(serialize_experiment_config(back).serialize() ==
          serialize_experiment_config(c).serialize());
}

TEST_CASE("audio stems survive the round trip") {
    ExperimentConfig c;
    c.dataset.kind = "audio";
    c.dataset.stems = {"mix/drums.wav", "mix/bass.wav"};
    c.dataset.mixture_path = "mix/full.wav";
    c.dataset.segment_length = 4096;
    const ExperimentConfig back = parse_experiment_config(serialize_experiment_config(c));
    CHECK(back.dataset.stems == c.dataset.stems);
    CHECK(back.dataset.mixture_path == c.dataset.mixture_path);
    CHECK(back.dataset.segment_length == 4096);
}

TEST_CASE("a config file parses with defaults for unstated keys") {
    fs::path dir = fresh_dir("cass_config_file");
    const fs::path path = dir / "exp.cfg";
    {
        std::ofstream out(path);
        out << "# experiment overrides\n"
            << "dataset.kind = ppg\n"
            << "dataset.n = 8\n"
            << "train.mode = cass_cross\n"
            << "network.channels = 4,6\n"
            << "train.epochs = 3\n";
    }
    const ExperimentConfig c = load_experiment_config(path.string());
    CHECK(c.dataset.kind == "ppg");
    CHECK(c.dataset.n == 8);
    CHECK(c.train.mode == Mode::cass_cross);
    CHECK(c.network.channels == std::vector<int>{4, 6});
    CHECK(c.network.block_count == 2); // inferred from the channel schedule
    CHECK(c.train.epochs == 3);
    // Untouched keys keep their defaults.
    CHECK(c.dataset.train_fraction == 0.8);
    CHECK(c.stft.window_length == 256);
    CHECK(c.loss_alpha == 0.9);
    fs::remove_all(dir);
}

TEST_CASE("config parsing rejects contradictions and bad values") {
    KvFile kv;
    kv.set("train.mode", "adversarial");
    CHECK_THROWS_AS(parse_experiment_config(kv), ConfigError);

    KvFile counts;
    counts.set_int_list("network.channels", {4, 6});
    counts.set_int("network.block_count", 3);
    CHECK_THROWS_AS(parse_experiment_config(counts), ConfigError);
    counts.set_int("network.block_count", 2);
    CHECK_NOTHROW(parse_experiment_config(counts));

    KvFile hop;
    hop.set_int("stft.window_length", 64);
    hop.set_int("stft.hop_length", 96); // hop longer than the window
    hop.set_int("stft.fft_size", 64);
    CHECK_THROWS_AS(parse_experiment_config(hop), ConfigError);

    KvFile fft;
    fft.set_int("stft.window_length", 96);
    fft.set_int("stft.hop_length", 24);
    fft.set_int("stft.fft_size", 96); // not a power of two
    CHECK_THROWS_AS(parse_experiment_config(fft), ConfigError);

    KvFile weights;
    weights.set_real("loss.alpha", 0.5);
    weights.set_real("loss.beta", 0.3);
    CHECK_THROWS_AS(parse_experiment_config(weights), ConfigError);

    KvFile norm;
    norm.set("norm.kind", "zscore");
    CHECK_THROWS_AS(parse_experiment_config(norm), ConfigError);
}

TEST_CASE("config hash ignores seeds but tracks every other change") {
    ExperimentConfig c = nondefault_config();
    const std::string base = config_hash(c);
    CHECK(is_hex8(base));

    ExperimentConfig seeds = c;
    seeds.train.seed = 12345;
    seeds.dataset.seed = 999;
    CHECK(config_hash(seeds) == base); // sibling seeds land side by side

    ExperimentConfig epochs = c;
    epochs.train.epochs = 8;
    CHECK(config_hash(epochs) != base);

    ExperimentConfig lr = c;
    lr.train.lr_ae = 3e-4;
    CHECK(config_hash(lr) != base);

    ExperimentConfig mode = c;
    mode.train.mode = Mode::cass;
    CHECK(config_hash(mode) != base);
}

TEST_CASE("dataset hash tracks the seed and ignores training settings") {
    ExperimentConfig c = nondefault_config();
    const std::string base = dataset_hash(c.dataset);
    CHECK(is_hex8(base));

    DatasetSpec seeded = c.dataset;
    seeded.seed = 1234;
    CHECK(dataset_hash(seeded) != base); // a new seed is new data

    DatasetSpec bigger = c.dataset;
    bigger.n = 25;
    CHECK(dataset_hash(bigger) != base);

    ExperimentConfig train_changed = c;
    train_changed.train.epochs = 50;
    train_changed.train.seed = 4;
    CHECK(dataset_hash(train_changed.dataset) == base);
}

TEST_CASE("loss weights derive from the mode") {
    ExperimentConfig c = nondefault_config();
    c.train.mode = Mode::cass_cross;
    LossWeights w = make_weights(c, 3);
    CHECK(w.alpha == 0.8);
    CHECK(w.beta == doctest::Approx(0.2));
    REQUIRE(w.cross_weights.size() == 3);
    for (size_t j = 0; j < 3; ++j) CHECK(w.cross_weights.at(j) == 0.05);

    c.train.mode = Mode::cass;
    CHECK(make_weights(c, 3).cross_weights.empty());
    c.train.mode = Mode::baseline;
    CHECK(make_weights(c, 2).cross_weights.empty());

    c.loss_alpha = 0.5;
    c.loss_beta = 0.3;
    CHECK_THROWS_AS(make_weights(c, 2), ConfigError);
}

TEST_CASE("generated datasets carry kind-specific names, rates and splits") {
    DatasetSpec ds;
    ds.kind = "ecg";
    ds.n = 10;
    ds.seed = 3;
    ds.sample_rate = 64.0;
    ds.duration = 1.0;
    StoredDataset ecg = generate_dataset(ds);
    CHECK(ecg.kind == "ecg");
    CHECK(ecg.seed == 3);
    CHECK(ecg.sample_rate == 64.0);
    CHECK(ecg.component_names == std::vector<std::string>{"maternal", "fetal"});
    CHECK(ecg.records.size() == 10);
    CHECK(ecg.split.train.size() + ecg.split.test.size() == 10);
    CHECK(!ecg.split.train.empty());
    CHECK(!ecg.split.test.empty());
    for (const auto& r : ecg.records) {
        CHECK(r.mixture.samples.size() == 64);
        CHECK(r.components.size() == 2);
    }

    ds.kind = "ppg";
    StoredDataset ppg = generate_dataset(ds);
    CHECK(ppg.component_names == std::vector<std::string>{"heartbeat", "respiratory"});

    ds.kind = "harmonic";
    ds.sample_rate = 4000.0;
    ds.duration = 0.02;
    StoredDataset har = generate_dataset(ds);
    CHECK(har.component_names == std::vector<std::string>{"low", "high"});
    CHECK(har.sample_rate == 4000.0);
}

namespace {

ExperimentConfig tiny_ecg_config(const std::string& out_dir) {
    ExperimentConfig c;
    c.dataset.kind = "ecg";
    c.dataset.n = 6;
    c.dataset.seed = 11;
    c.dataset.sample_rate = 64.0;
    c.dataset.duration = 2.0;
    c.stft.window_length = 64;
    c.stft.hop_length = 16;
    c.stft.fft_size = 64;
    c.network.latent_dim = 4;
    c.network.channels = {2};
    c.network.block_count = 1;
    c.train.mode = Mode::cass;
    c.train.epochs = 2;
    c.train.batch_size = 2;
    c.train.lr_ae = 1e-3;
    c.train.lr_disc = 1e-4;
    c.train.eval_every = 1;
    c.train.checkpoint_every = 1;
    c.train.seed = 5;
    c.out_dir = out_dir;
    return c;
}

bool logs_match(const std::vector<EpochLog>& a, const std::vector<EpochLog>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].epoch != b[i].epoch) return false;
        if (a[i].test_l2 != b[i].test_l2) return false;
        if (a[i].ae_loss != b[i].ae_loss) return false;
        for (size_t j = 0; j < a[i].disc_loss.size(); ++j) {
            const double x = a[i].disc_loss[j], y = b[i].disc_loss[j];
            if (std::isnan(x) != std::isnan(y)) return false;
            if (!std::isnan(x) && x != y) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("prepared data is shaped consistently and keeps truth waveforms") {
    ExperimentConfig c = tiny_ecg_config("unused");
    StoredDataset ds = generate_dataset(c.dataset);
    PreparedData prep = prepare_dataset(ds, c.stft, c.norm);

    CHECK(prep.bins == 33);
    CHECK(prep.frames == 1 + (128 - 64) / 16);
    CHECK(prep.train.size() == ds.split.train.size());
    CHECK(prep.test.size() == ds.split.test.size());
    CHECK(prep.eval_items.size() == prep.test.size());
    CHECK(prep.component_names == ds.component_names);
    CHECK(prep.sample_rate == 64.0);
    CHECK(prep.dataset_id == "ecg-n6-s11");
    for (const auto& item : prep.eval_items) {
        CHECK(item.truth.size() == 2);
        CHECK(item.prepared.mixture.shape == std::vector<int>{prep.bins, prep.frames});
    }

    // The normalizer is fitted on the training records only.
    std::vector<MixtureExample> train_records;
    for (size_t idx : ds.split.train) train_records.push_back(ds.records[idx]);
    Normalizer expect = fit_normalizer(c.norm, train_records, c.stft);
    CHECK(prep.norm.kind == expect.kind);
    CHECK(prep.norm.scale == expect.scale);

    StoredDataset broken = ds;
    broken.split.train = {};
    CHECK_THROWS_AS(prepare_dataset(broken, c.stft, c.norm), DataError);
    broken = ds;
    broken.split.test = {ds.records.size() + 5};
    CHECK_THROWS_AS(prepare_dataset(broken, c.stft, c.norm), DataError);
}

TEST_CASE("output directories key on hashes and seeds") {
    ExperimentConfig c = tiny_ecg_config("out");
    CHECK(dataset_dir(c) == "out/datasets/ecg-" + dataset_hash(c.dataset));
    CHECK(run_dir(c) == "out/" + config_hash(c) + "-s5");

    ExperimentConfig sibling = c;
    sibling.train.seed = 6;
    // Sibling seeds differ only in the suffix.
    CHECK(run_dir(sibling) == "out/" + config_hash(c) + "-s6");
}

TEST_CASE("the resolved network adopts the prepared data's shape") {
    ExperimentConfig c = tiny_ecg_config("unused");
    PreparedData prep = prepare_dataset(generate_dataset(c.dataset), c.stft, c.norm);
    NetworkSpec spec = resolve_network(c, prep);
    CHECK(spec.input_bins == prep.bins);
    CHECK(spec.input_frames == prep.frames);
    CHECK(spec.channels == c.network.channels);
    CHECK(spec.latent_dim == c.network.latent_dim);

    CassModel m = build_experiment_model(c, prep);
    CHECK(m.mode == Mode::cass);
    CHECK(m.k() == 2);
    CHECK(m.components[0].name == "maternal");
    CHECK(m.components[1].name == "fetal");
}

TEST_CASE("an experiment run writes logs and a final checkpoint") {
    fs::path dir = fresh_dir("cass_config_run");
    ExperimentConfig c = tiny_ecg_config(dir.string());
    PreparedData prep = prepare_dataset(generate_dataset(c.dataset), c.stft, c.norm);
    CassModel m = build_experiment_model(c, prep);

    const std::string rd = (dir / "run").string();
    std::ostringstream progress;
    auto logs = train_experiment(c, prep, m, rd, false, &progress);

    REQUIRE(logs.size() == 2);
    CHECK(fs::exists(rd + "/logs.csv"));
    CHECK(fs::exists(rd + "/checkpoints/epoch_00001"));
    CHECK(fs::exists(rd + "/checkpoints/epoch_00002"));
    CHECK(latest_checkpoint(rd) == rd + "/checkpoints/epoch_00002");
    CHECK(progress.str().find("epoch 1/2") != std::string::npos);
    CHECK(progress.str().find("maternal") != std::string::npos);

    LoadedLogs loaded = read_epoch_log_csv(rd + "/logs.csv");
    CHECK(loaded.component_names == prep.component_names);
    CHECK(logs_match(loaded.logs, logs));

    CHECK(latest_checkpoint((dir / "nothing_here").string()) == "");
    fs::remove_all(dir);
}

TEST_CASE("resuming an experiment reproduces the uninterrupted run") {
    fs::path dir = fresh_dir("cass_config_resume");
    ExperimentConfig c = tiny_ecg_config(dir.string());
    PreparedData prep = prepare_dataset(generate_dataset(c.dataset), c.stft, c.norm);

    // Straight four-epoch run.
    ExperimentConfig four = c;
    four.train.epochs = 4;
    CassModel straight = build_experiment_model(four, prep);
    auto straight_logs = train_experiment(four, prep, straight, (dir / "a").string());

    // Two epochs, then resume to four with a fresh model object.
    CassModel first = build_experiment_model(c, prep);
    train_experiment(c, prep, first, (dir / "b").string());
    CassModel second = build_experiment_model(four, prep);
    std::ostringstream progress;
    auto resumed_logs =
        train_experiment(four, prep, second, (dir / "b").string(), true, &progress);

    CHECK(progress.str().find("resuming from") != std::string::npos);
    CHECK(logs_match(resumed_logs, straight_logs));
    auto ps = straight.all_params();
    auto pr = second.all_params();
    REQUIRE(ps.size() == pr.size());
    for (size_t i = 0; i < ps.size(); ++i) CHECK(ps[i]->value.v == pr[i]->value.v);
    fs::remove_all(dir);
}

TEST_CASE("file hashing matches the reference vectors") {
    fs::path dir = fresh_dir("cass_config_hash");
    const fs::path p = dir / "probe.bin";
    {
        std::ofstream out(p, std::ios::binary);
        out << "foobar";
    }
    CHECK(file_hash(p.string()) == 0x85944171f73967e8ull);
    CHECK_THROWS_AS(file_hash((dir / "missing").string()), DataError);
    fs::remove_all(dir);
}

TEST_CASE("the library reports its version") {
    CHECK(std::string(kVersion) == "0.1.0");
}
