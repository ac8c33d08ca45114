#include "cass/spectro.hpp"

#include <cmath>
#include <complex>

#include "cass/fft.hpp"

namespace cass {

void StftConfig::validate() const {
    if (hop_length <= 0 || window_length <= 0)
        throw ConfigError("stft: window and hop must be positive");
    if (hop_length > window_length) throw ConfigError("stft: hop exceeds window length");
    if (fft_size < window_length) throw ConfigError("stft: fft_size smaller than window");
    if (!is_power_of_two(static_cast<size_t>(fft_size)))
        throw ConfigError("stft: fft_size must be a power of two");
    if (window_kind != "hann" && window_kind != "rect")
        throw ConfigError("stft: unknown window kind '" + window_kind + "'");
}

bool satisfies_cola(const StftConfig& cfg) {
    if (cfg.window_length % cfg.hop_length != 0) return false;
    if (cfg.window_kind == "hann") return 2 * cfg.hop_length <= cfg.window_length;
    return true; // rect
}

std::vector<double> make_window(const StftConfig& cfg) {
    cfg.validate();
    std::vector<double> w(static_cast<size_t>(cfg.window_length), 1.0);
    if (cfg.window_kind == "hann") {
        // Half-sample phase keeps the endpoints nonzero, so the unpadded
        // overlap-add inverse recovers the boundary samples too.
        const int n = cfg.window_length;
        for (int i = 0; i < n; ++i) {
            const double s = std::sin(M_PI * (i + 0.5) / n);
            w[static_cast<size_t>(i)] = s * s;
        }
    }
    return w;
}

void Spectrogram::validate() const {
    config.validate();
    if (magnitude.rank() != 2 || !magnitude.same_shape(phase))
        throw ArgumentError("spectrogram: magnitude/phase shape mismatch");
    if (magnitude.dim(0) != config.fft_size / 2 + 1)
        throw ArgumentError("spectrogram: bin count does not match fft_size");
    for (double m : magnitude.v)
        if (!std::isfinite(m) || m < 0.0)
            throw ArgumentError("spectrogram: magnitude must be finite and nonnegative");
    for (double p : phase.v)
        if (!std::isfinite(p)) throw ArgumentError("spectrogram: non-finite phase");
    if (source_length < config.window_length)
        throw ArgumentError("spectrogram: source_length shorter than window");
    if (sample_rate <= 0.0) throw ArgumentError("spectrogram: sample_rate must be positive");
}

Spectrogram stft(const Waveform& w, const StftConfig& cfg) {
    cfg.validate();
    const int len = static_cast<int>(w.length());
    if (len < cfg.window_length) throw ArgumentError("stft: input shorter than window");

    const int n_frames = 1 + (len - cfg.window_length) / cfg.hop_length;
    const int n_bins = cfg.fft_size / 2 + 1;
    const std::vector<double> window = make_window(cfg);

    Spectrogram s;
    s.config = cfg;
    s.source_length = len;
    s.sample_rate = w.sample_rate;
    s.magnitude = Tensor({n_bins, n_frames});
    s.phase = Tensor({n_bins, n_frames});

    std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.fft_size));
    for (int m = 0; m < n_frames; ++m) {
        const int off = m * cfg.hop_length;
        for (int i = 0; i < cfg.window_length; ++i)
            buf[static_cast<size_t>(i)] = window[static_cast<size_t>(i)] *
                                          w.samples[static_cast<size_t>(off + i)];
        for (int i = cfg.window_length; i < cfg.fft_size; ++i) buf[static_cast<size_t>(i)] = 0.0;
        fft_inplace(buf, false);
        for (int b = 0; b < n_bins; ++b) {
            const std::complex<double> c = buf[static_cast<size_t>(b)];
            s.magnitude.at(b, m) = std::abs(c);
            s.phase.at(b, m) = std::atan2(c.imag(), c.real());
        }
    }
    return s;
}

Waveform istft(const Spectrogram& s) {
    s.validate();
    const StftConfig& cfg = s.config;
    if (!satisfies_cola(cfg))
        throw ConfigError("istft: window/hop pair does not satisfy the overlap-add condition");

    const int n_frames = s.frames();
    const int n_bins = s.bins();
    const std::vector<double> window = make_window(cfg);
    const int covered = cfg.window_length + (n_frames - 1) * cfg.hop_length;

    std::vector<double> acc(static_cast<size_t>(std::max(covered, s.source_length)), 0.0);
    std::vector<double> norm(acc.size(), 0.0);

    std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.fft_size));
    for (int m = 0; m < n_frames; ++m) {
        for (int b = 0; b < n_bins; ++b) {
            const double mag = s.magnitude.at(b, m);
            const double ph = s.phase.at(b, m);
            buf[static_cast<size_t>(b)] = std::polar(mag, ph);
        }
        for (int b = n_bins; b < cfg.fft_size; ++b)
            buf[static_cast<size_t>(b)] = std::conj(buf[static_cast<size_t>(cfg.fft_size - b)]);
        fft_inplace(buf, true);

        const int off = m * cfg.hop_length;
        for (int i = 0; i < cfg.window_length; ++i) {
            const double wi = window[static_cast<size_t>(i)];
            acc[static_cast<size_t>(off + i)] += wi * buf[static_cast<size_t>(i)].real();
            norm[static_cast<size_t>(off + i)] += wi * wi;
        }
    }

    std::vector<double> out(static_cast<size_t>(s.source_length), 0.0);
    const size_t n_out = std::min(out.size(), static_cast<size_t>(covered));
    for (size_t i = 0; i < n_out; ++i)
        if (norm[i] > 0.0) out[i] = acc[i] / norm[i];
    return Waveform(std::move(out), s.sample_rate);
}

Tensor Normalizer::normalize(const Tensor& magnitude) const {
    Tensor out = magnitude;
    if (kind == "peak" && scale != 0.0)
        for (double& x : out.v) x /= scale;
    return out;
}

Tensor Normalizer::denormalize(const Tensor& magnitude) const {
    Tensor out = magnitude;
    if (kind == "peak")
        for (double& x : out.v) x *= scale;
    return out;
}

Normalizer fit_normalizer(const NormalizationSpec& spec,
                          const std::vector<MixtureExample>& dataset, const StftConfig& cfg) {
    if (spec.kind != "peak" && spec.kind != "none")
        throw ConfigError("unknown normalization kind '" + spec.kind + "'");
    Normalizer norm;
    norm.kind = spec.kind;
    if (spec.kind == "none") {
        norm.scale = 1.0;
        return norm;
    }
    double peak = 0.0;
    for (const MixtureExample& ex : dataset) {
        const Spectrogram sm = stft(ex.mixture, cfg);
        for (double m : sm.magnitude.v) peak = std::max(peak, m);
        for (const Waveform& c : ex.components) {
            const Spectrogram sc = stft(c, cfg);
            for (double m : sc.magnitude.v) peak = std::max(peak, m);
        }
    }
    norm.scale = peak > 0.0 ? peak : 1.0;
    return norm;
}

ModelExample preprocess(const MixtureExample& example, const StftConfig& cfg,
                        const Normalizer& norm) {
    example.validate();
    const Spectrogram sm = stft(example.mixture, cfg);

    ModelExample out;
    out.mixture = norm.normalize(sm.magnitude);
    out.phase = sm.phase;
    out.source_length = sm.source_length;
    out.sample_rate = sm.sample_rate;
    out.targets.reserve(example.components.size());
    for (const Waveform& c : example.components)
        out.targets.push_back(norm.normalize(stft(c, cfg).magnitude));
    return out;
}

Waveform postprocess(const Tensor& component_magnitude, const Tensor& mixture_phase,
                     const StftConfig& cfg, const Normalizer& norm, int source_length,
                     double sample_rate) {
    if (!component_magnitude.same_shape(mixture_phase))
        throw ArgumentError("postprocess: magnitude/phase shape mismatch");

    Spectrogram s;
    s.config = cfg;
    s.source_length = source_length;
    s.sample_rate = sample_rate;
    s.magnitude = norm.denormalize(component_magnitude);
    // Softplus decoders cannot emit negatives, but clamp anyway so arbitrary
    // tensors round-trip through the Spectrogram invariants.
    for (double& m : s.magnitude.v) m = std::max(m, 0.0);
    s.phase = mixture_phase;
    return istft(s);
}

} // namespace cass
