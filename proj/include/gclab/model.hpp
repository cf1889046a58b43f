#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gclab/conv.hpp"
#include "gclab/linalg.hpp"
#include "gclab/spectral.hpp"

namespace gclab::model {

// How a neuron's filter b is stored:
//   spectral_signal: b is a vertex-domain signal in R^n, applied as b * x.
//   poly_filter:     b holds degree+1 coefficients of a polynomial in the
//                    basis shift (single-shift bases only).
enum class ConvMode { spectral_signal, poly_filter };

// relu evaluates the exact ramp; smoothed substitutes the C^1 approximation
// with width eps everywhere it appears (forward and residuals), which makes
// analytic gradients agree with finite differences of the evaluated loss.
enum class Activation { relu, smoothed };

struct Neuron {
  linalg::Vec a, b, c;
};

struct NetworkParams {
  ConvMode mode = ConvMode::poly_filter;
  int degree = 0;  // filter degree L (poly_filter)
  double eps = 1e-5;
  Activation activation = Activation::relu;
  std::vector<Neuron> neurons;

  int m() const { return static_cast<int>(neurons.size()); }
};

struct Gradient {
  std::vector<Neuron> neurons;  // same shapes as the parameters
};

// Norms entering the path norm. p is the primal vector norm (1, 2 or inf);
// the output weight a is measured in the dual norm (1<->inf, 2<->2), c in the
// primal norm, and b in the convolution norm: conv_kind (scaled by d3) in
// spectral_signal mode, coefficient-weighted shift powers (cofi) in
// poly_filter mode. d0..d3 are the domain constants; the defaults describe
// Omega = [-1,1]^n under the sup norm.
struct NormConfig {
  double p = std::numeric_limits<double>::infinity();
  conv::ConvNormKind conv_kind = conv::ConvNormKind::coop_inf;
  double d0 = 1.0, d1 = 1.0, d2 = 1.0, d3 = 1.0;

  double dual_p() const;
};

// Smoothed ramp: t for t >= eps, (t+eps)^2/(4 eps) on (-eps, eps), 0 below.
// Returns {value, derivative}; the derivative is the ramp used inside
// gradient formulas regardless of the forward activation.
std::pair<double, double> relu_smooth(double t, double eps);

double activate(double t, Activation act, double eps);

// f(x) = (1/M) sum_m a_m^T sigma(b_m * x + c_m).
double forward(const spectral::SpectralBasis& basis, const NetworkParams& params,
               const linalg::Vec& x);

// ||Theta||_{P,p}: p-mean over neurons of ||a||_* (||b||_co + ||c||) for
// finite p, max over neurons for p = inf.
double path_norm(const spectral::SpectralBasis& basis, const NetworkParams& params,
                 double p, const NormConfig& cfg);

double neuron_path_norm(const spectral::SpectralBasis& basis, const NetworkParams& params,
                        int m, const NormConfig& cfg);

// Relative mean squared error sum_i (y_i - f(x_i))^2 / ||y||_2^2.
double rmse(const spectral::SpectralBasis& basis, const NetworkParams& params,
            const std::vector<linalg::Vec>& xs, const linalg::Vec& y);

// Relative uniform approximation error
// sup_i |y_i - f(x_i)| / (sup_i |y_i| + 1e-6).
double ruae(const spectral::SpectralBasis& basis, const NetworkParams& params,
            const std::vector<linalg::Vec>& xs, const linalg::Vec& y);

// Full-batch gradient of the relative MSE in poly_filter mode. Residuals use
// the params' activation; the c and b components use the smoothed ramp
// derivative with width params.eps.
Gradient grad(const spectral::SpectralBasis& basis, const NetworkParams& params,
              const std::vector<linalg::Vec>& xs, const linalg::Vec& y);

void check_params(const spectral::SpectralBasis& basis, const NetworkParams& params);

// hex_floats serializes parameter entries as C hex-float strings for exact
// round trips; the loader accepts both representations.
std::string to_json(const NetworkParams& params, bool hex_floats = false);
NetworkParams params_from_json(const std::string& text);

}  // namespace gclab::model
