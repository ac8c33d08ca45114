#pragma once

#include <string>
#include <vector>

#include "cass/synthgen.hpp"
#include "cass/tensor.hpp"
#include "cass/waveform.hpp"

namespace cass {

// STFT analysis parameters. The window is applied without centering or
// padding: frame m covers samples [m*hop, m*hop + window_length).
struct StftConfig {
    int window_length = 256;
    int hop_length = 64;
    std::string window_kind = "hann"; // "hann" (periodic, half-sample phase) or "rect"
    int fft_size = 256;

    void validate() const;
};

// Window/hop pairs that overlap-add to a constant, which is what makes the
// inverse exact. For the supported windows this means hop divides the window
// length, with at least 2x overlap for hann.
bool satisfies_cola(const StftConfig& cfg);

std::vector<double> make_window(const StftConfig& cfg);

struct Spectrogram {
    Tensor magnitude; // [bins, frames], nonnegative
    Tensor phase;     // [bins, frames], radians
    StftConfig config;
    int source_length = 0;
    double sample_rate = 1.0; // carried through for inversion

    int bins() const { return magnitude.dim(0); }
    int frames() const { return magnitude.dim(1); }
    void validate() const;
};

// Magnitude/phase of the windowed DFT frames.
// frames = 1 + floor((len - window_length) / hop), bins = fft_size/2 + 1.
Spectrogram stft(const Waveform& w, const StftConfig& cfg);

// Weighted overlap-add inversion, trimmed (or zero-padded) to source_length.
// Requires a COLA-valid config.
Waveform istft(const Spectrogram& s);

struct NormalizationSpec {
    std::string kind = "peak"; // "peak" or "none"
};

// Frozen normalization state: one global scale for the whole dataset, fitted
// once over both mixture and component magnitudes.
struct Normalizer {
    std::string kind = "peak";
    double scale = 1.0; // magnitudes are divided by this

    Tensor normalize(const Tensor& magnitude) const;
    Tensor denormalize(const Tensor& magnitude) const;
};

Normalizer fit_normalizer(const NormalizationSpec& spec,
                          const std::vector<MixtureExample>& dataset, const StftConfig& cfg);

// One model-ready record: normalized magnitudes plus the mixture phase kept
// for reconstruction.
struct ModelExample {
    Tensor mixture;              // [bins, frames]
    std::vector<Tensor> targets; // K component magnitudes
    Tensor phase;                // mixture phase
    int source_length = 0;
    double sample_rate = 1.0;
};

ModelExample preprocess(const MixtureExample& example, const StftConfig& cfg,
                        const Normalizer& norm);

// De-normalizes the magnitude, pairs it with the given phase and inverts.
Waveform postprocess(const Tensor& component_magnitude, const Tensor& mixture_phase,
                     const StftConfig& cfg, const Normalizer& norm, int source_length,
                     double sample_rate);

} // namespace cass
