#include "cass/model.hpp"

#include <numeric>

#include "cass/errors.hpp"

namespace cass {

void NetworkSpec::validate() const {
    if (input_bins <= 0 || input_frames <= 0)
        throw ConfigError("network: input shape must be positive");
    if (latent_dim <= 0) throw ConfigError("network: latent_dim must be positive");
    if (static_cast<long>(latent_dim) >= static_cast<long>(input_bins) * input_frames)
        throw ConfigError("network: latent_dim must be smaller than the input size");
    if (channels.empty()) throw ConfigError("network: channel schedule must be nonempty");
    for (int c : channels)
        if (c <= 0) throw ConfigError("network: channel counts must be positive");
    if (block_count != static_cast<int>(channels.size()))
        throw ConfigError("network: block_count must match the channel schedule length");
    if (nonlinearity != "relu") throw ConfigError("network: unsupported nonlinearity '" + nonlinearity + "'");
    if (!discriminator_head)
        throw ConfigError("network: only the sigmoid scalar discriminator head is supported");
}

std::vector<std::pair<int, int>> NetworkSpec::spatial_chain() const {
    std::vector<std::pair<int, int>> chain;
    chain.emplace_back(input_bins, input_frames);
    for (int b = 0; b < block_count; ++b)
        chain.emplace_back(Conv2d::out_side(chain.back().first, 2),
                           Conv2d::out_side(chain.back().second, 2));
    return chain;
}

int NetworkSpec::flat_dim() const {
    auto chain = spatial_chain();
    return channels.back() * chain.back().first * chain.back().second;
}

Tensor as_chw(const Tensor& plane) {
    if (plane.shape.size() != 2) throw ArgumentError("expected a [bins, frames] tensor");
    Tensor t = plane;
    t.shape = {1, plane.shape[0], plane.shape[1]};
    return t;
}

Tensor as_plane(const Tensor& chw) {
    if (chw.shape.size() != 3 || chw.shape[0] != 1)
        throw ArgumentError("expected a [1, h, w] tensor");
    Tensor t = chw;
    t.shape = {chw.shape[1], chw.shape[2]};
    return t;
}

namespace {

Tensor flatten(const Tensor& x) {
    Tensor t = x;
    t.shape = {static_cast<int>(x.v.size())};
    return t;
}

Tensor unflatten(const Tensor& x, std::vector<int> shape) {
    Tensor t = x;
    t.shape = std::move(shape);
    return t;
}

// Shared convolutional trunk of the encoder and discriminator.
void build_trunk(const NetworkSpec& spec, const std::string& prefix, Conv2d& conv_in,
                 std::vector<ResBlock>& blocks) {
    conv_in = Conv2d(1, spec.channels[0], 1, prefix + ".conv_in");
    blocks.clear();
    for (int b = 0; b < spec.block_count; ++b) {
        const int in_c = b == 0 ? spec.channels[0] : spec.channels[b - 1];
        blocks.emplace_back(in_c, spec.channels[b], 2, prefix + ".block" + std::to_string(b));
    }
}

Tensor trunk_forward(const Conv2d& conv_in, const std::vector<ResBlock>& blocks, const Tensor& x,
                     Tensor* a0, std::vector<ResBlockActs>* acts) {
    Tensor a = relu(conv_in.forward(x));
    if (a0) *a0 = a;
    if (acts) acts->resize(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b)
        a = blocks[b].forward(a, acts ? &(*acts)[b] : nullptr);
    return a;
}

Tensor trunk_backward(Conv2d& conv_in, std::vector<ResBlock>& blocks, const Tensor& x,
                      const Tensor& a0, const std::vector<ResBlockActs>& acts, Tensor d,
                      bool accumulate) {
    for (size_t b = blocks.size(); b-- > 0;)
        d = blocks[b].backward(acts[b], d, accumulate);
    d = relu_backward(a0, d);
    Tensor dx;
    conv_in.backward(x, d, &dx, accumulate);
    return dx;
}

} // namespace

Tensor Encoder::forward(const Tensor& x, EncoderActs* acts) const {
    Tensor a = trunk_forward(conv_in, blocks, x, acts ? &acts->a0 : nullptr,
                             acts ? &acts->blocks : nullptr);
    Tensor flat = flatten(a);
    if (acts) {
        acts->x = x;
        acts->flat = flat;
    }
    return head.forward(flat);
}

Tensor Encoder::backward(const EncoderActs& acts, const Tensor& d_latent, bool accumulate) {
    Tensor d_flat;
    head.backward(acts.flat, d_latent, &d_flat, accumulate);
    Tensor d = unflatten(d_flat, acts.blocks.back().out.shape);
    return trunk_backward(conv_in, blocks, acts.x, acts.a0, acts.blocks, std::move(d), accumulate);
}

void Encoder::collect(std::vector<Param*>& out) {
    out.push_back(&conv_in.weight);
    out.push_back(&conv_in.bias);
    for (auto& b : blocks) {
        out.push_back(&b.conv1.weight);
        out.push_back(&b.conv1.bias);
        out.push_back(&b.conv2.weight);
        out.push_back(&b.conv2.bias);
    }
    out.push_back(&head.weight);
    out.push_back(&head.bias);
}

Tensor Decoder::forward(const Tensor& z, DecoderActs* acts) const {
    Tensor lin = relu(head.forward(z));
    Tensor a = unflatten(lin, {head.out_dim / (seed_h * seed_w), seed_h, seed_w});
    if (acts) {
        acts->z = z;
        acts->lin = a;
        acts->blocks.resize(blocks.size());
    }
    for (size_t i = 0; i < blocks.size(); ++i) {
        a = upsample_nearest(a, targets[i].first, targets[i].second);
        a = blocks[i].forward(a, acts ? &acts->blocks[i] : nullptr);
    }
    Tensor y = softplus(conv_out.forward(a));
    if (acts) acts->y = y;
    return y;
}

Tensor Decoder::backward(const DecoderActs& acts, const Tensor& d_y, bool accumulate) {
    Tensor d = softplus_backward(acts.y, d_y);
    Tensor d_in;
    conv_out.backward(acts.blocks.back().out, d, &d_in, accumulate);
    d = std::move(d_in);
    for (size_t i = blocks.size(); i-- > 0;) {
        d = blocks[i].backward(acts.blocks[i], d, accumulate);
        d = upsample_nearest_backward(d, sources[i].first, sources[i].second);
    }
    d = relu_backward(acts.lin, flatten(d));
    Tensor dz;
    head.backward(acts.z, d, &dz, accumulate);
    return dz;
}

void Decoder::collect(std::vector<Param*>& out) {
    out.push_back(&head.weight);
    out.push_back(&head.bias);
    for (auto& b : blocks) {
        out.push_back(&b.conv1.weight);
        out.push_back(&b.conv1.bias);
        out.push_back(&b.conv2.weight);
        out.push_back(&b.conv2.bias);
    }
    out.push_back(&conv_out.weight);
    out.push_back(&conv_out.bias);
}

double Discriminator::forward(const Tensor& x, DiscActs* acts) const {
    Tensor a = trunk_forward(conv_in, blocks, x, acts ? &acts->a0 : nullptr,
                             acts ? &acts->blocks : nullptr);
    Tensor flat = flatten(a);
    Tensor logit = head.forward(flat);
    const double s = sigmoid(logit.v[0]);
    if (acts) {
        acts->x = x;
        acts->flat = flat;
        acts->s = s;
    }
    return clamp_prob(s);
}

Tensor Discriminator::backward(const DiscActs& acts, double d_prob, bool accumulate) {
    // The clamp is flat at the rails, so saturated outputs pass no gradient.
    double d_logit = 0.0;
    if (acts.s > kProbEps && acts.s < 1.0 - kProbEps)
        d_logit = d_prob * acts.s * (1.0 - acts.s);
    Tensor dl;
    dl.shape = {1};
    dl.v = {d_logit};
    Tensor d_flat;
    head.backward(acts.flat, dl, &d_flat, accumulate);
    Tensor d = unflatten(d_flat, acts.blocks.back().out.shape);
    return trunk_backward(conv_in, blocks, acts.x, acts.a0, acts.blocks, std::move(d), accumulate);
}

void Discriminator::collect(std::vector<Param*>& out) {
    out.push_back(&conv_in.weight);
    out.push_back(&conv_in.bias);
    for (auto& b : blocks) {
        out.push_back(&b.conv1.weight);
        out.push_back(&b.conv1.bias);
        out.push_back(&b.conv2.weight);
        out.push_back(&b.conv2.bias);
    }
    out.push_back(&head.weight);
    out.push_back(&head.bias);
}

Tensor ComponentModel::encode(const Tensor& x) const {
    if (x.shape != std::vector<int>{spec.input_bins, spec.input_frames})
        throw ArgumentError("encode: input shape does not match the network input");
    return encoder.forward(as_chw(x), nullptr);
}

Tensor ComponentModel::decode(const Tensor& z) const {
    if (z.shape != std::vector<int>{spec.latent_dim})
        throw ArgumentError("decode: latent shape does not match latent_dim");
    return as_plane(decoder.forward(z, nullptr));
}

Tensor ComponentModel::reconstruct(const Tensor& x) const { return decode(encode(x)); }

double ComponentModel::discriminate(const Tensor& x) const {
    if (x.shape != std::vector<int>{spec.input_bins, spec.input_frames})
        throw ArgumentError("discriminate: input shape does not match the network input");
    return discriminator.forward(as_chw(x), nullptr);
}

std::vector<Param*> ComponentModel::autoencoder_params() {
    std::vector<Param*> out;
    encoder.collect(out);
    decoder.collect(out);
    return out;
}

std::vector<Param*> ComponentModel::discriminator_params() {
    std::vector<Param*> out;
    discriminator.collect(out);
    return out;
}

std::vector<Param*> ComponentModel::all_params() {
    std::vector<Param*> out = autoencoder_params();
    discriminator.collect(out);
    return out;
}

size_t ComponentModel::param_count() {
    size_t n = 0;
    for (Param* p : all_params()) n += p->size();
    return n;
}

Mode parse_mode(const std::string& s) {
    if (s == "baseline") return Mode::baseline;
    if (s == "cass") return Mode::cass;
    if (s == "cass_cross") return Mode::cass_cross;
    throw ConfigError("unknown mode '" + s + "' (expected baseline, cass or cass_cross)");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::baseline: return "baseline";
        case Mode::cass: return "cass";
        case Mode::cass_cross: return "cass_cross";
    }
    throw ArgumentError("invalid mode value");
}

std::vector<Param*> CassModel::all_params() {
    std::vector<Param*> out;
    for (auto& c : components)
        for (Param* p : c.all_params()) out.push_back(p);
    return out;
}

ComponentModel build_component(const std::string& name, const NetworkSpec& spec, uint64_t seed) {
    spec.validate();
    ComponentModel m;
    m.name = name;
    m.spec = spec;
    const auto chain = spec.spatial_chain();
    const int flat = spec.flat_dim();

    build_trunk(spec, name + ".enc", m.encoder.conv_in, m.encoder.blocks);
    m.encoder.head = Dense(flat, spec.latent_dim, name + ".enc.head");

    m.decoder.head = Dense(spec.latent_dim, flat, name + ".dec.head");
    m.decoder.seed_h = chain.back().first;
    m.decoder.seed_w = chain.back().second;
    for (int b = spec.block_count; b-- > 0;) {
        const int in_c = spec.channels[b];
        const int out_c = b == 0 ? spec.channels[0] : spec.channels[b - 1];
        const size_t stage = m.decoder.blocks.size();
        m.decoder.sources.push_back(chain[b + 1]);
        m.decoder.targets.push_back(chain[b]);
        m.decoder.blocks.emplace_back(in_c, out_c, 1,
                                      name + ".dec.block" + std::to_string(stage));
    }
    m.decoder.conv_out = Conv2d(spec.channels[0], 1, 1, name + ".dec.conv_out");

    build_trunk(spec, name + ".disc", m.discriminator.conv_in, m.discriminator.blocks);
    m.discriminator.head = Dense(flat, 1, name + ".disc.head");

    Rng root(seed);
    Rng enc_rng = root.split(1);
    m.encoder.conv_in.init(enc_rng);
    for (auto& b : m.encoder.blocks) b.init(enc_rng);
    m.encoder.head.init(enc_rng);

    Rng dec_rng = root.split(2);
    m.decoder.head.init(dec_rng);
    for (auto& b : m.decoder.blocks) b.init(dec_rng);
    m.decoder.conv_out.init(dec_rng);

    Rng disc_rng = root.split(3);
    m.discriminator.conv_in.init(disc_rng);
    for (auto& b : m.discriminator.blocks) b.init(disc_rng);
    m.discriminator.head.init(disc_rng);

    return m;
}

CassModel build_model(const std::vector<std::string>& names, const NetworkSpec& spec, Mode mode,
                      const LossWeights& weights, uint64_t seed) {
    if (names.size() < 2) throw ConfigError("model: at least two components are required");
    weights.validate();
    CassModel model;
    model.mode = mode;
    model.weights = weights;
    Rng root(seed);
    for (size_t i = 0; i < names.size(); ++i)
        model.components.push_back(build_component(names[i], spec, root.split(100 + i).state()));
    return model;
}

} // namespace cass
