#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cass/waveform.hpp"

namespace cass {

// Generation parameters attached to each record, plus the record's derived
// seed. Keys depend on the dataset kind (ecg: maternal_bpm, fetal_bpm,
// amplitude_ratio, noise_freq, noise_amp; ppg: heart_bpm, resp_freq,
// resp_amp; audio/harmonic: segment or tone parameters).
struct RecordMeta {
    uint64_t seed = 0;
    std::map<std::string, double> values;

    double get(const std::string& key) const;
    bool has(const std::string& key) const { return values.count(key) > 0; }
};

// One training/eval record: the observed mixture plus the K ground-truth
// component signals it was built from.
struct MixtureExample {
    Waveform mixture;
    std::vector<Waveform> components;
    RecordMeta meta;

    size_t num_components() const { return components.size(); }
    void validate() const;
};

// Sampled parameters of one synthetic ECG record. Ranges outside the
// physiological bands are construction errors.
struct EcgParams {
    double maternal_bpm;   // [80, 90]
    double fetal_bpm;      // [120, 160]
    double amplitude_ratio; // [2, 10], maternal peak / fetal peak
    double noise_freq;     // Hz, > 0
    double noise_amp;      // >= 0
    double duration;       // s, > 0
    double sample_rate;    // Hz, > 0
    uint64_t seed;

    EcgParams(double maternal_bpm, double fetal_bpm, double amplitude_ratio, double noise_freq,
              double noise_amp, double duration, double sample_rate, uint64_t seed);
};

// Periodic ECG-like beat train: three Gaussian bumps per beat (P wave, QRS
// complex, T wave), offsets and widths proportional to the beat period, QRS
// dominant. Output is rescaled so the peak absolute amplitude equals
// `amplitude`. The seed draws a random starting phase.
Waveform gen_ecg_beat_train(double bpm, double duration, double sample_rate, double amplitude,
                            uint64_t seed);

// Pure sinusoid amplitude*sin(2*pi*freq*t), round(duration*sample_rate) samples.
Waveform gen_respiratory_noise(double freq, double amplitude, double duration,
                               double sample_rate);

// (heartbeat PPG, respiratory PPG). Heartbeat is a smooth pulse train with a
// dicrotic bump; respiratory is a slow quasi-sinusoid. Both zero-mean with
// unit peak; caller applies amplitudes. Rest conditions, no motion artifact.
std::pair<Waveform, Waveform> gen_ppg_pair(double heart_bpm, double resp_freq, double duration,
                                           double sample_rate, uint64_t seed);

// Sum of harmonics of `fundamental` with 1/h amplitude decay. Harmonics at or
// above Nyquist are dropped; the fundamental itself must be below Nyquist.
Waveform gen_harmonic_tone(double fundamental, int n_harmonics, double duration,
                           double sample_rate);

// Elementwise sum. All inputs must share length and sample rate.
Waveform mix(const std::vector<Waveform>& components,
             const Waveform* noise = nullptr);

struct EcgDatasetOptions {
    double sample_rate = 500.0;
    double duration = 2.0;
};

struct PpgDatasetOptions {
    double sample_rate = 125.0;
    double duration = 2.0;
};

// n records with maternal BPM ~ U[80,90], fetal BPM ~ U[120,160], peak ratio
// ~ U[2,10]. Components are (maternal, fetal); the sinusoidal respiratory
// noise enters the mixture only, with frequency ~ U[0.15,0.4] Hz and
// amplitude ~ U[0, 0.5] of the fetal amplitude.
std::vector<MixtureExample> make_ecg_dataset(int n, uint64_t seed,
                                             const EcgDatasetOptions& opt = {});

// n records with components (heartbeat, respiratory), mixture = exact sum.
// Heart BPM ~ U[60,100], breathing ~ U[0.15,0.4] Hz, respiratory amplitude
// ~ U[0.3,0.7] of the heartbeat's.
std::vector<MixtureExample> make_ppg_dataset(int n, uint64_t seed,
                                             const PpgDatasetOptions& opt = {});

// Segment local audio stems into fixed-length windows. K = stems.size(). When
// mixture_path is empty the mixture is the stem sum; otherwise it is loaded
// and must match the stems' rate. Files must be single-channel WAV of equal
// sample rate.
std::vector<MixtureExample> ingest_audio_stems(const std::vector<std::string>& stem_paths,
                                               const std::string& mixture_path,
                                               size_t segment_length);

// Two-tone stand-in for instrument stems: component fundamentals drawn from
// disjoint registers (110-220 Hz and 440-880 Hz).
struct HarmonicDatasetOptions {
    double sample_rate = 8000.0;
    double duration = 0.5;
    int n_harmonics = 5;
};
std::vector<MixtureExample> make_harmonic_dataset(int n, uint64_t seed,
                                                  const HarmonicDatasetOptions& opt = {});

// Deterministic 80/20-style split by record. Indices are shuffled from the
// seed and partitioned; each side is returned in ascending order.
struct DatasetSplit {
    std::vector<size_t> train;
    std::vector<size_t> test;
};
DatasetSplit split_dataset(size_t n, double train_fraction, uint64_t seed);

} // namespace cass
