#pragma once

#include <vector>

#include "cass/nn.hpp"

namespace cass {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adaptive-moment optimizer bound to a fixed parameter list. Moments live
// here so they can be checkpointed alongside the parameters.
class Adam {
  public:
    Adam() = default;
    Adam(std::vector<Param*> params, AdamConfig cfg);

    void step();      // consume accumulated gradients, update parameters
    void zero_grad(); // clear gradients on all bound parameters

    long steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Param*>& params() const { return params_; }
    const std::vector<Tensor>& moment1() const { return m_; }
    const std::vector<Tensor>& moment2() const { return v_; }
    void restore(long t, std::vector<Tensor> m, std::vector<Tensor> v);

  private:
    std::vector<Param*> params_;
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace cass
