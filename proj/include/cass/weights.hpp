#pragma once

#include <cmath>
#include <cstddef>
#include <map>

#include "cass/errors.hpp"

namespace cass {

// Weights of the combined reconstruction/adversarial objective. alpha scales
// the reconstruction term, beta the adversarial term, and cross_weights[j]
// scales discriminator i's rejection of component j's synthesized output
// (summed over j != i).
struct LossWeights {
    double alpha = 0.9;
    double beta = 0.1;
    std::map<size_t, double> cross_weights;

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0)
            throw ConfigError("loss weights: alpha and beta must lie in [0, 1]");
        if (std::fabs(alpha + beta - 1.0) > 1e-12)
            throw ConfigError("loss weights: alpha + beta must equal 1");
        for (const auto& [j, w] : cross_weights) {
            (void)j;
            if (w < 0.0) throw ConfigError("loss weights: cross weights must be nonnegative");
        }
    }

    // The cross weight applied when discriminator i judges component j.
    double cross_weight_for(size_t i, size_t j) const {
        if (j == i) throw ArgumentError("cross weight requested for own component");
        auto it = cross_weights.find(j);
        if (it == cross_weights.end())
            throw ConfigError("missing cross weight for component " + std::to_string(j));
        return it->second;
    }

    static LossWeights uniform_cross(double alpha, double beta, double cross, size_t k) {
        LossWeights w;
        w.alpha = alpha;
        w.beta = beta;
        for (size_t j = 0; j < k; ++j) w.cross_weights[j] = cross;
        w.validate();
        return w;
    }
};

} // namespace cass
