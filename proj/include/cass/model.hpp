#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cass/nn.hpp"
#include "cass/weights.hpp"

namespace cass {

// Architecture description shared by the encoder, decoder and discriminator of
// one component. The encoder halves each spatial dimension once per block; the
// decoder mirrors the chain back up with nearest-neighbour upsampling so odd
// sizes are restored exactly.
struct NetworkSpec {
    int input_bins = 0;
    int input_frames = 0;
    int latent_dim = 128;
    std::vector<int> channels = {16, 32, 64, 64};
    int block_count = 4;
    std::string nonlinearity = "relu";
    bool discriminator_head = true; // discriminator ends in a clamped sigmoid scalar

    void validate() const;

    // Spatial sizes (h, w) at each depth: entry 0 is the input, entry k the
    // output of block k. Length block_count + 1.
    std::vector<std::pair<int, int>> spatial_chain() const;
    int flat_dim() const; // channels.back() * h_last * w_last
};

struct EncoderActs {
    Tensor x;
    Tensor a0;
    std::vector<ResBlockActs> blocks;
    Tensor flat;
};

struct Encoder {
    Conv2d conv_in;
    std::vector<ResBlock> blocks;
    Dense head;

    Tensor forward(const Tensor& x, EncoderActs* acts) const;
    Tensor backward(const EncoderActs& acts, const Tensor& d_latent, bool accumulate);
    void collect(std::vector<Param*>& out);
};

struct DecoderActs {
    Tensor z;
    Tensor lin; // relu(head(z)) reshaped to [c, h, w]
    std::vector<ResBlockActs> blocks;
    Tensor y;
};

struct Decoder {
    Dense head;
    std::vector<ResBlock> blocks;             // applied smallest scale first
    std::vector<std::pair<int, int>> targets; // upsample target per stage
    std::vector<std::pair<int, int>> sources; // spatial size entering each upsample
    Conv2d conv_out;
    int seed_h = 0, seed_w = 0; // spatial size the latent projects to

    Tensor forward(const Tensor& z, DecoderActs* acts) const;
    Tensor backward(const DecoderActs& acts, const Tensor& d_y, bool accumulate);
    void collect(std::vector<Param*>& out);
};

struct DiscActs {
    Tensor x;
    Tensor a0;
    std::vector<ResBlockActs> blocks;
    Tensor flat;
    double s = 0.0; // raw sigmoid, before probability clamping
};

struct Discriminator {
    Conv2d conv_in;
    std::vector<ResBlock> blocks;
    Dense head;

    double forward(const Tensor& x, DiscActs* acts) const; // clamped probability
    Tensor backward(const DiscActs& acts, double d_prob, bool accumulate);
    void collect(std::vector<Param*>& out);
};

// One source component: an autoencoder plus the discriminator that judges
// whether a spectrogram is a genuine example of this source.
struct ComponentModel {
    std::string name;
    NetworkSpec spec;
    Encoder encoder;
    Decoder decoder;
    Discriminator discriminator;

    // Inputs and reconstructions are [bins, frames] magnitude tensors.
    Tensor encode(const Tensor& x) const;
    Tensor decode(const Tensor& z) const;
    Tensor reconstruct(const Tensor& x) const;
    double discriminate(const Tensor& x) const;

    std::vector<Param*> autoencoder_params();
    std::vector<Param*> discriminator_params();
    std::vector<Param*> all_params();
    size_t param_count();
};

enum class Mode { baseline, cass, cass_cross };
Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

struct CassModel {
    std::vector<ComponentModel> components;
    Mode mode = Mode::cass;
    LossWeights weights;

    size_t k() const { return components.size(); }
    std::vector<Param*> all_params();
};

ComponentModel build_component(const std::string& name, const NetworkSpec& spec, uint64_t seed);
CassModel build_model(const std::vector<std::string>& names, const NetworkSpec& spec, Mode mode,
                      const LossWeights& weights, uint64_t seed);

// Reshape helpers between [bins, frames] planes and the [1, h, w] layout the
// convolution stacks use. Data is shared; only the shape changes.
Tensor as_chw(const Tensor& plane);
Tensor as_plane(const Tensor& chw);

} // namespace cass
