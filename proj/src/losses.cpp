#include "cass/losses.hpp"

#include <cmath>

#include "cass/errors.hpp"

namespace cass {

double mse_loss(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) throw ArgumentError("mse: shape mismatch");
    if (a.v.empty()) throw ArgumentError("mse: empty tensors");
    double acc = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.v.size());
}

double bce_loss(double p, double label) {
    if (label < 0.0 || label > 1.0) throw ArgumentError("bce: label must lie in [0, 1]");
    p = clamp_prob(p);
    return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

namespace {

void check_batch(const CassModel& model, size_t i, const Batch& batch) {
    if (i >= model.components.size())
        throw ArgumentError("objective: component index out of range");
    if (batch.empty()) throw ArgumentError("objective: empty batch");
    for (const ModelExample* e : batch)
        if (!e || e->targets.size() != model.components.size())
            throw ArgumentError("objective: example does not match the component count");
}

} // namespace

double ae_objective(CassModel& model, size_t i, const Batch& batch, bool accumulate) {
    check_batch(model, i, batch);
    ComponentModel& c = model.components[i];
    const LossWeights& w = model.weights;
    const bool adversarial = model.mode != Mode::baseline && w.beta != 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const ModelExample* e : batch) {
        const Tensor x = as_chw(e->mixture);
        const Tensor& t = e->targets[i];
        EncoderActs ea;
        const Tensor z = c.encoder.forward(x, &ea);
        DecoderActs da;
        const Tensor r = c.decoder.forward(z, &da);
        if (r.v.size() != t.v.size())
            throw ArgumentError("objective: target shape does not match the reconstruction");

        const double n = static_cast<double>(r.v.size());
        double mse = 0.0;
        Tensor d_r = zeros_like(r);
        for (size_t k = 0; k < r.v.size(); ++k) {
            const double d = r.v[k] - t.v[k];
            mse += d * d;
            d_r.v[k] = w.alpha * 2.0 * d / n * inv_b;
        }
        mse /= n;
        double loss = w.alpha * mse;

        if (adversarial) {
            DiscActs dca;
            const double p = c.discriminator.forward(r, &dca);
            loss += w.beta * bce_loss(p, 1.0);
            // d/dp of -log(p), pushed through the discriminator input only.
            const Tensor d_from_disc =
                c.discriminator.backward(dca, w.beta * (-1.0 / p) * inv_b, false);
            for (size_t k = 0; k < d_r.v.size(); ++k) d_r.v[k] += d_from_disc.v[k];
        }

        const Tensor dz = c.decoder.backward(da, d_r, accumulate);
        c.encoder.backward(ea, dz, accumulate);
        total += loss;
    }
    return total * inv_b;
}

namespace {

// One discriminator update contribution: judge `input` against `label`,
// accumulate discriminator gradients scaled by weight / batch.
double judge(ComponentModel& c, const Tensor& input, double label, double weight, double inv_b,
             bool accumulate) {
    DiscActs acts;
    const double p = c.discriminator.forward(input, &acts);
    const double loss = weight * bce_loss(p, label);
    const double d_p = label > 0.5 ? -1.0 / p : 1.0 / (1.0 - p);
    c.discriminator.backward(acts, weight * d_p * inv_b, accumulate);
    return loss;
}

Tensor synthesize(const ComponentModel& c, const Tensor& mixture) {
    return c.decoder.forward(c.encoder.forward(as_chw(mixture), nullptr), nullptr);
}

double disc_objective_impl(CassModel& model, size_t i, const Batch& batch,
                           const CrossFakes* cross_fakes, bool with_cross, bool accumulate) {
    check_batch(model, i, batch);
    ComponentModel& c = model.components[i];
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (size_t e = 0; e < batch.size(); ++e) {
        const ModelExample& ex = *batch[e];
        const Tensor fake = synthesize(c, ex.mixture);
        total += judge(c, fake, 0.0, 1.0, inv_b, accumulate);
        total += judge(c, as_chw(ex.targets[i]), 1.0, 1.0, inv_b, accumulate);
        if (!with_cross) continue;
        for (size_t j = 0; j < model.components.size(); ++j) {
            if (j == i) continue;
            const double wj = model.weights.cross_weight_for(i, j);
            if (wj == 0.0) continue;
            Tensor other;
            if (cross_fakes) {
                if (j >= cross_fakes->size() || e >= (*cross_fakes)[j].size())
                    throw ArgumentError("objective: cross fakes do not cover the batch");
                other = as_chw((*cross_fakes)[j][e]);
            } else {
                other = synthesize(model.components[j], ex.mixture);
            }
            total += judge(c, other, 0.0, wj, inv_b, accumulate);
        }
    }
    return total * inv_b;
}

} // namespace

double disc_objective(CassModel& model, size_t i, const Batch& batch, bool accumulate) {
    if (model.mode == Mode::baseline)
        throw ConfigError("disc_objective: baseline mode has no discriminator step");
    return disc_objective_impl(model, i, batch, nullptr, false, accumulate);
}

double disc_objective_cross(CassModel& model, size_t i, const Batch& batch,
                            const CrossFakes* cross_fakes, bool accumulate) {
    if (model.mode != Mode::cass_cross)
        throw ConfigError("disc_objective_cross: requires cass_cross mode");
    return disc_objective_impl(model, i, batch, cross_fakes, true, accumulate);
}

double gan_minmax_reference(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
    if (d_real.empty() || d_fake.empty())
        throw ArgumentError("minmax reference: empty samples");
    double real = 0.0, fake = 0.0;
    for (double p : d_real) real += std::log(clamp_prob(p));
    for (double p : d_fake) fake += 1.0 - std::log(clamp_prob(p));
    return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

} // namespace cass
