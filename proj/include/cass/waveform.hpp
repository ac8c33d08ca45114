#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cass/errors.hpp"

namespace cass {

// A sampled 1-D signal. Samples are dimensionless amplitudes.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 0.0; // Hz

    Waveform() = default;
    Waveform(std::vector<double> s, double rate) : samples(std::move(s)), sample_rate(rate) {
        validate();
    }

    size_t length() const { return samples.size(); }
    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

    void validate() const {
        if (sample_rate <= 0.0) throw ArgumentError("waveform sample_rate must be positive");
        if (samples.empty()) throw ArgumentError("waveform must contain at least one sample");
        for (double s : samples)
            if (!std::isfinite(s)) throw ArgumentError("waveform contains non-finite sample");
    }
};

inline double peak_abs(const Waveform& w) {
    double m = 0.0;
    for (double s : w.samples) m = std::max(m, std::fabs(s));
    return m;
}

} // namespace cass
