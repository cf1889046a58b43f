#pragma once

#include <vector>

#include "gclab/linalg.hpp"
#include "gclab/model.hpp"
#include "gclab/spectral.hpp"

namespace gclab::kernels {

// Per-sample quantities that do not depend on the parameters, computed once
// per batch. poly_filter stores the shift powers applied to each sample,
// powers[(i*(L+1) + l)*n + v] = (S^l x_i)(v); spectral_signal stores the
// transforms xhat[i*n + v] = (U^T x_i)(v).
struct BatchData {
  model::ConvMode mode = model::ConvMode::poly_filter;
  int s = 0, n = 0, degree = 0;
  std::vector<double> powers;
  std::vector<double> xhat;

  const double* power(int i, int l) const { return powers.data() + (static_cast<std::size_t>(i) * (degree + 1) + l) * n; }
  const double* hat(int i) const { return xhat.data() + static_cast<std::size_t>(i) * n; }
};

BatchData make_batch(const spectral::SpectralBasis& basis, const std::vector<linalg::Vec>& xs,
                     model::ConvMode mode, int degree);

struct BatchGrad {
  model::Gradient grad;
  double loss = 0.0;        // relative MSE at the evaluated parameters
  linalg::Vec residuals;    // z_i = y_i - f(x_i)
};

// Predictions f(x_i) for the whole batch. The parallel version splits samples
// across threads; every per-sample value is computed independently, so it is
// bitwise identical to the serial twin at any thread count.
linalg::Vec batch_forward(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                          const BatchData& data);
linalg::Vec batch_forward_serial(const spectral::SpectralBasis& basis,
                                 const model::NetworkParams& params, const BatchData& data);

// Full-batch gradient of sum_i z_i^2 / ||y||_2^2 (poly_filter mode only).
// deterministic = true writes per-sample contributions into a slab and
// reduces them in index order, making the result independent of the thread
// count; false merges per-thread partial sums in thread order, which is
// reproducible only for a fixed thread count.
BatchGrad batch_grad(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                     const BatchData& data, const linalg::Vec& y, bool deterministic = true);
BatchGrad batch_grad_serial(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                            const BatchData& data, const linalg::Vec& y);

}  // namespace gclab::kernels
