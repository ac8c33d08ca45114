#pragma once

#include <vector>

#include "cass/model.hpp"
#include "cass/spectro.hpp"
#include "cass/weights.hpp"

namespace cass {

// Mean squared error over all elements. Shapes must match.
double mse_loss(const Tensor& a, const Tensor& b);

// Binary cross-entropy for a single probability; p is clamped away from the
// rails so the logs stay finite.
double bce_loss(double p, double label);

// A minibatch is a list of views into preprocessed examples.
using Batch = std::vector<const ModelExample*>;

// Synthesized outputs of every component for each batch example, captured
// before a step so cross terms judge a frozen opponent. Indexed [j][example].
using CrossFakes = std::vector<std::vector<Tensor>>;

// Autoencoder objective for component i, averaged over the batch:
//   alpha * MSE(AE_i(X), X_i) + beta * BCE(D_i(AE_i(X)), 1)
// In baseline mode only the reconstruction term is used. Gradients flow into
// the encoder and decoder of component i only; the discriminator is treated
// as a fixed judge.
double ae_objective(CassModel& model, size_t i, const Batch& batch, bool accumulate = true);

// Discriminator objective for component i, averaged over the batch:
//   BCE(D_i(AE_i(X)), 0) + BCE(D_i(X_i), 1)
// Gradients flow into discriminator i only.
double disc_objective(CassModel& model, size_t i, const Batch& batch, bool accumulate = true);

// Discriminator objective with cross terms: disc_objective plus
//   sum_{j != i} w_j * BCE(D_i(AE_j(X)), 0)
// cross_fakes, when given, supplies AE_j(X) from a snapshot; otherwise the
// live components are used. Components with w_j == 0 are skipped entirely.
double disc_objective_cross(CassModel& model, size_t i, const Batch& batch,
                            const CrossFakes* cross_fakes = nullptr, bool accumulate = true);

// Literal two-player value function kept as an executable reference:
//   mean(log D(x)) + mean(1 - log D(G(z)))
double gan_minmax_reference(const std::vector<double>& d_real, const std::vector<double>& d_fake);

} // namespace cass
