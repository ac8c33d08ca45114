#include "cass/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "cass/rng.hpp"
#include "cass/wav.hpp"

namespace cass {

namespace {

constexpr double kTwoPi = 6.283185307179586;

size_t sample_count(double duration, double sample_rate) {
    if (duration <= 0.0) throw ArgumentError("duration must be positive");
    if (sample_rate <= 0.0) throw ArgumentError("sample_rate must be positive");
    const auto n = static_cast<long long>(std::llround(duration * sample_rate));
    if (n < 1) throw ArgumentError("duration * sample_rate rounds to zero samples");
    return static_cast<size_t>(n);
}

struct Bump {
    double amp;
    double center; // fraction of the beat period
    double sigma;  // fraction of the beat period
};

// Evaluate a periodic bump train at time t. Beats sit at phase0 + k*period;
// only the three nearest beats contribute materially.
double bump_train(double t, double phase0, double period, const Bump* bumps, int n_bumps) {
    const double k0 = std::floor((t - phase0) / period + 0.5);
    double acc = 0.0;
    for (int dk = -1; dk <= 1; ++dk) {
        const double beat = phase0 + (k0 + dk) * period;
        for (int b = 0; b < n_bumps; ++b) {
            const double dt = t - beat - bumps[b].center * period;
            const double s = bumps[b].sigma * period;
            acc += bumps[b].amp * std::exp(-dt * dt / (2.0 * s * s));
        }
    }
    return acc;
}

void rescale_to_peak(std::vector<double>& samples, double target_peak) {
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::fabs(s));
    if (peak == 0.0 || target_peak == 0.0) {
        std::fill(samples.begin(), samples.end(), 0.0);
        return;
    }
    const double scale = target_peak / peak;
    for (double& s : samples) s *= scale;
}

void subtract_mean(std::vector<double>& samples) {
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    for (double& s : samples) s -= mean;
}

} // namespace

double RecordMeta::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ArgumentError("record meta has no key '" + key + "'");
    return it->second;
}

void MixtureExample::validate() const {
    if (components.size() < 2) throw ArgumentError("mixture example needs K >= 2 components");
    mixture.validate();
    for (const Waveform& c : components) {
        c.validate();
        if (c.length() != mixture.length() || c.sample_rate != mixture.sample_rate)
            throw ArgumentError("component does not match mixture length/sample rate");
    }
}

EcgParams::EcgParams(double maternal_bpm_, double fetal_bpm_, double amplitude_ratio_,
                     double noise_freq_, double noise_amp_, double duration_,
                     double sample_rate_, uint64_t seed_)
    : maternal_bpm(maternal_bpm_), fetal_bpm(fetal_bpm_), amplitude_ratio(amplitude_ratio_),
      noise_freq(noise_freq_), noise_amp(noise_amp_), duration(duration_),
      sample_rate(sample_rate_), seed(seed_) {
    if (maternal_bpm < 80.0 || maternal_bpm > 90.0)
        throw ArgumentError("maternal_bpm outside [80, 90]");
    if (fetal_bpm < 120.0 || fetal_bpm > 160.0)
        throw ArgumentError("fetal_bpm outside [120, 160]");
    if (amplitude_ratio < 2.0 || amplitude_ratio > 10.0)
        throw ArgumentError("amplitude_ratio outside [2, 10]");
    if (noise_freq <= 0.0) throw ArgumentError("noise_freq must be positive");
    if (noise_amp < 0.0) throw ArgumentError("noise_amp must be nonnegative");
    if (duration <= 0.0) throw ArgumentError("duration must be positive");
    if (sample_rate <= 0.0) throw ArgumentError("sample_rate must be positive");
}

Waveform gen_ecg_beat_train(double bpm, double duration, double sample_rate, double amplitude,
                            uint64_t seed) {
    if (bpm <= 0.0) throw ArgumentError("bpm must be positive");
    const size_t n = sample_count(duration, sample_rate);

    // P wave, QRS complex, T wave. Offsets and widths scale with the beat
    // period so the morphology survives the fetal BPM range.
    static const Bump kEcgBumps[3] = {
        {0.18, -0.22, 0.040}, // P
        {1.00, 0.00, 0.016},  // QRS
        {0.28, 0.30, 0.060},  // T
    };

    const double period = 60.0 / bpm;
    Rng rng(seed);
    const double phase0 = rng.uniform(0.0, period);

    std::vector<double> samples(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        samples[i] = bump_train(t, phase0, period, kEcgBumps, 3);
    }
    rescale_to_peak(samples, std::fabs(amplitude));
    return Waveform(std::move(samples), sample_rate);
}

Waveform gen_respiratory_noise(double freq, double amplitude, double duration,
                               double sample_rate) {
    if (freq <= 0.0) throw ArgumentError("noise frequency must be positive");
    const size_t n = sample_count(duration, sample_rate);
    std::vector<double> samples(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        samples[i] = amplitude * std::sin(kTwoPi * freq * t);
    }
    return Waveform(std::move(samples), sample_rate);
}

std::pair<Waveform, Waveform> gen_ppg_pair(double heart_bpm, double resp_freq, double duration,
                                           double sample_rate, uint64_t seed) {
    if (heart_bpm <= 0.0) throw ArgumentError("heart_bpm must be positive");
    if (resp_freq <= 0.0) throw ArgumentError("resp_freq must be positive");
    const size_t n = sample_count(duration, sample_rate);

    Rng rng(seed);
    const double period = 60.0 / heart_bpm;
    const double phase0 = rng.uniform(0.0, period);
    const double resp_phase = rng.uniform(0.0, kTwoPi);
    const double harm_phase = rng.uniform(0.0, kTwoPi);

    // Systolic peak plus a smaller dicrotic bump. Widths are broad relative
    // to the period so the fundamental dominates the spectrum.
    static const Bump kPpgBumps[2] = {
        {1.00, 0.00, 0.13},
        {0.35, 0.35, 0.10},
    };

    std::vector<double> heart(n), resp(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        heart[i] = bump_train(t, phase0, period, kPpgBumps, 2);
        resp[i] = std::sin(kTwoPi * resp_freq * t + resp_phase) +
                  0.15 * std::sin(2.0 * kTwoPi * resp_freq * t + harm_phase);
    }
    subtract_mean(heart);
    subtract_mean(resp);
    rescale_to_peak(heart, 1.0);
    rescale_to_peak(resp, 1.0);
    return {Waveform(std::move(heart), sample_rate), Waveform(std::move(resp), sample_rate)};
}

Waveform gen_harmonic_tone(double fundamental, int n_harmonics, double duration,
                           double sample_rate) {
    if (fundamental <= 0.0) throw ArgumentError("fundamental must be positive");
    if (n_harmonics < 1) throw ArgumentError("n_harmonics must be >= 1");
    const size_t n = sample_count(duration, sample_rate);
    if (fundamental >= sample_rate / 2.0)
        throw ArgumentError("fundamental at or above Nyquist frequency");

    std::vector<double> samples(n, 0.0);
    for (int h = 1; h <= n_harmonics; ++h) {
        const double f = fundamental * h;
        if (f >= sample_rate / 2.0) break;
        const double amp = 1.0 / static_cast<double>(h);
        for (size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            samples[i] += amp * std::sin(kTwoPi * f * t);
        }
    }
    return Waveform(std::move(samples), sample_rate);
}

Waveform mix(const std::vector<Waveform>& components, const Waveform* noise) {
    if (components.empty()) throw ArgumentError("mix needs at least one component");
    const size_t len = components[0].length();
    const double rate = components[0].sample_rate;
    for (const Waveform& c : components)
        if (c.length() != len || c.sample_rate != rate)
            throw ArgumentError("mix: components differ in length or sample rate");
    if (noise && (noise->length() != len || noise->sample_rate != rate))
        throw ArgumentError("mix: noise does not match component length or sample rate");

    std::vector<double> out(len, 0.0);
    for (const Waveform& c : components)
        for (size_t i = 0; i < len; ++i) out[i] += c.samples[i];
    if (noise)
        for (size_t i = 0; i < len; ++i) out[i] += noise->samples[i];
    return Waveform(std::move(out), rate);
}

std::vector<MixtureExample> make_ecg_dataset(int n, uint64_t seed, const EcgDatasetOptions& opt) {
    if (n < 1) throw ArgumentError("dataset size must be >= 1");
    Rng root(seed);

    std::vector<MixtureExample> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rec = root.split(static_cast<uint64_t>(i));
        const uint64_t rec_seed = rec.state();
        const double fetal_amp = 1.0;
        EcgParams p(rec.uniform(80.0, 90.0), rec.uniform(120.0, 160.0), rec.uniform(2.0, 10.0),
                    rec.uniform(0.15, 0.4), rec.uniform(0.0, 0.5) * fetal_amp, opt.duration,
                    opt.sample_rate, rec_seed);
        const uint64_t maternal_seed = rec.next_u64();
        const uint64_t fetal_seed = rec.next_u64();

        Waveform maternal = gen_ecg_beat_train(p.maternal_bpm, p.duration, p.sample_rate,
                                               p.amplitude_ratio * fetal_amp, maternal_seed);
        Waveform fetal =
            gen_ecg_beat_train(p.fetal_bpm, p.duration, p.sample_rate, fetal_amp, fetal_seed);
        Waveform noise =
            gen_respiratory_noise(p.noise_freq, p.noise_amp, p.duration, p.sample_rate);

        MixtureExample ex;
        ex.components = {std::move(maternal), std::move(fetal)};
        ex.mixture = mix(ex.components, &noise);
        ex.meta.seed = rec_seed;
        ex.meta.values = {{"maternal_bpm", p.maternal_bpm},
                          {"fetal_bpm", p.fetal_bpm},
                          {"amplitude_ratio", p.amplitude_ratio},
                          {"noise_freq", p.noise_freq},
                          {"noise_amp", p.noise_amp}};
        ex.validate();
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<MixtureExample> make_ppg_dataset(int n, uint64_t seed, const PpgDatasetOptions& opt) {
    if (n < 1) throw ArgumentError("dataset size must be >= 1");
    Rng root(seed);

    std::vector<MixtureExample> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rec = root.split(static_cast<uint64_t>(i));
        const uint64_t rec_seed = rec.state();
        const double heart_bpm = rec.uniform(60.0, 100.0);
        const double resp_freq = rec.uniform(0.15, 0.4);
        const double resp_amp = rec.uniform(0.3, 0.7);
        const uint64_t pair_seed = rec.next_u64();

        auto [heart, resp] =
            gen_ppg_pair(heart_bpm, resp_freq, opt.duration, opt.sample_rate, pair_seed);
        for (double& s : resp.samples) s *= resp_amp;

        MixtureExample ex;
        ex.components = {std::move(heart), std::move(resp)};
        ex.mixture = mix(ex.components);
        ex.meta.seed = rec_seed;
        ex.meta.values = {{"heart_bpm", heart_bpm},
                          {"resp_freq", resp_freq},
                          {"resp_amp", resp_amp}};
        ex.validate();
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<MixtureExample> ingest_audio_stems(const std::vector<std::string>& stem_paths,
                                               const std::string& mixture_path,
                                               size_t segment_length) {
    if (stem_paths.size() < 2) throw ArgumentError("need at least two stems");
    if (segment_length < 1) throw ArgumentError("segment_length must be >= 1");

    std::vector<Waveform> stems;
    stems.reserve(stem_paths.size());
    for (const std::string& path : stem_paths) stems.push_back(read_wav_mono(path));

    const double rate = stems[0].sample_rate;
    size_t min_len = stems[0].length();
    for (size_t i = 1; i < stems.size(); ++i) {
        if (stems[i].sample_rate != rate)
            throw DataError("stem '" + stem_paths[i] + "' sample rate mismatch");
        min_len = std::min(min_len, stems[i].length());
    }

    Waveform mixture_file;
    const bool have_mixture = !mixture_path.empty();
    if (have_mixture) {
        mixture_file = read_wav_mono(mixture_path);
        if (mixture_file.sample_rate != rate)
            throw DataError("mixture '" + mixture_path + "' sample rate mismatch");
        min_len = std::min(min_len, mixture_file.length());
    }

    const size_t n_segments = min_len / segment_length;
    if (n_segments == 0)
        throw DataError("zero usable segments: stems shorter than segment_length");

    std::vector<MixtureExample> out;
    out.reserve(n_segments);
    for (size_t s = 0; s < n_segments; ++s) {
        const size_t off = s * segment_length;
        MixtureExample ex;
        for (const Waveform& stem : stems) {
            std::vector<double> seg(stem.samples.begin() + static_cast<long>(off),
                                    stem.samples.begin() + static_cast<long>(off + segment_length));
            ex.components.emplace_back(std::move(seg), rate);
        }
        if (have_mixture) {
            std::vector<double> seg(
                mixture_file.samples.begin() + static_cast<long>(off),
                mixture_file.samples.begin() + static_cast<long>(off + segment_length));
            ex.mixture = Waveform(std::move(seg), rate);
        } else {
            ex.mixture = mix(ex.components);
        }
        ex.meta.seed = 0;
        ex.meta.values = {{"segment_index", static_cast<double>(s)}};
        ex.validate();
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<MixtureExample> make_harmonic_dataset(int n, uint64_t seed,
                                                  const HarmonicDatasetOptions& opt) {
    if (n < 1) throw ArgumentError("dataset size must be >= 1");
    Rng root(seed);

    std::vector<MixtureExample> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rec = root.split(static_cast<uint64_t>(i));
        const uint64_t rec_seed = rec.state();
        const double f_low = rec.uniform(110.0, 220.0);
        const double f_high = rec.uniform(440.0, 880.0);

        Waveform low = gen_harmonic_tone(f_low, opt.n_harmonics, opt.duration, opt.sample_rate);
        Waveform high = gen_harmonic_tone(f_high, opt.n_harmonics, opt.duration, opt.sample_rate);

        MixtureExample ex;
        ex.components = {std::move(low), std::move(high)};
        ex.mixture = mix(ex.components);
        ex.meta.seed = rec_seed;
        ex.meta.values = {{"fundamental_low", f_low}, {"fundamental_high", f_high}};
        ex.validate();
        out.push_back(std::move(ex));
    }
    return out;
}

DatasetSplit split_dataset(size_t n, double train_fraction, uint64_t seed) {
    if (train_fraction < 0.0 || train_fraction > 1.0)
        throw ArgumentError("train_fraction must lie in [0, 1]");
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;

    Rng rng = Rng(seed).split(0x517ULL); // dedicated stream for the split
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform_int(i));
        std::swap(idx[i - 1], idx[j]);
    }

    const size_t n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n)));
    DatasetSplit split;
    split.train.assign(idx.begin(), idx.begin() + static_cast<long>(std::min(n_train, n)));
    split.test.assign(idx.begin() + static_cast<long>(std::min(n_train, n)), idx.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace cass
