#include "cass/optim.hpp"

#include <cmath>

#include "cass/errors.hpp"

namespace cass {

Adam::Adam(std::vector<Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.lr <= 0.0) throw ConfigError("optimizer: learning rate must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Param* p : params_) {
        m_.push_back(zeros_like(p->value));
        v_.push_back(zeros_like(p->value));
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        double* m = m_[i].v.data();
        double* v = v_[i].v.data();
        const double* g = p.grad.v.data();
        double* w = p.value.v.data();
        for (size_t k = 0; k < p.value.v.size(); ++k) {
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            w[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void Adam::restore(long t, std::vector<Tensor> m, std::vector<Tensor> v) {
    if (m.size() != params_.size() || v.size() != params_.size())
        throw DataError("optimizer restore: moment count does not match parameters");
    for (size_t i = 0; i < params_.size(); ++i)
        if (m[i].v.size() != params_[i]->size() || v[i].v.size() != params_[i]->size())
            throw DataError("optimizer restore: moment shape mismatch on " + params_[i]->name);
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
}

} // namespace cass
