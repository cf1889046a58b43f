#pragma once

#include <map>
#include <vector>

#include "gclab/linalg.hpp"
#include "gclab/spectral.hpp"

namespace gclab::conv {

// Multivariate polynomial filter h(S_1, ..., S_K): terms map a multi-index
// (l_1, ..., l_K) of total degree <= degree to its coefficient.
struct FilterPoly {
  int num_vars = 1;
  int degree = 0;
  std::map<std::vector<int>, double> terms;

  double eval(const std::vector<double>& lambda) const;

  // Univariate conveniences (num_vars == 1).
  static FilterPoly from_coeffs(const std::vector<double>& coeffs);
  std::vector<double> coeffs() const;  // dense by degree, num_vars == 1 only
};

// Convolution kernel for a filter signal b: beta = gft(b) and the cached
// convolution matrix C = U diag(beta) U^T, so b * x = C x.
struct ConvKernel {
  linalg::Vec b;
  linalg::Vec beta;
  linalg::Mat c_mat;
};

ConvKernel make_kernel(const spectral::SpectralBasis& basis, const linalg::Vec& b);

linalg::Vec convolve(const ConvKernel& kernel, const linalg::Vec& x);
// Uncached spectral route: U (beta ⊙ U^T x).
linalg::Vec convolve(const spectral::SpectralBasis& basis, const linalg::Vec& b,
                     const linalg::Vec& x);

// Polynomial filter with h(lambda(n)) = gft(b)(n). For one shift and
// max_degree >= n-1 this is exact Newton interpolation (expanded to monomial
// coefficients); otherwise a least-squares fit over all multi-indices of
// total degree <= max_degree, which must reproduce gft(b) to
// 1e-8 * ||gft(b)||_inf or the interpolation is reported unavailable.
// Refuses to run when the joint spectrum is not distinct (assumption1_ok).
FilterPoly filter_from_signal(const spectral::SpectralBasis& basis, const linalg::Vec& b,
                              int max_degree);

// Signal with gft(b)(n) = h(lambda(n)), i.e. b = U (h(lambda(n)))_n.
linalg::Vec signal_from_filter(const spectral::SpectralBasis& basis, const FilterPoly& h);

// Filter-subspace basis: signals S_1^{l_1} ... S_K^{l_K} U 1 over all
// multi-indices of total degree <= max_total_degree (graded lex order), with
// the numerical rank of the collection (singular values > 1e-10 * largest).
struct WlBasis {
  std::vector<linalg::Vec> signals;
  std::vector<std::vector<int>> exponents;
  int rank = 0;
};
WlBasis wl_basis(const spectral::SpectralBasis& basis, int max_total_degree);

// coop_p: induced p-norm of C = U diag(gft(b)) U^T, scaled by d3
//   (p = 2 reduces to max_n |beta_n|).
// cofi: sum over terms |h_l| * prod_k ||S_k||^{l_k} with spectral shift norms.
enum class ConvNormKind { coop1, coop2, coop_inf, cofi };

double conv_norm(const spectral::SpectralBasis& basis, const linalg::Vec& b,
                 ConvNormKind kind, double d3 = 1.0);
double conv_norm(const spectral::SpectralBasis& basis, const FilterPoly& h,
                 ConvNormKind kind, double d3 = 1.0);

// Neuron (a, b, c) with a^T sigma(b * x + c) = sigma(v^T x + w) for every x:
// a = e_{n0}, c = w e_{n0}, and gft(b)(n) = gft(v)(n) / U(n0, n). Requires
// every |U(n0, n)| >= 1e-8.
struct LiftedNeuron {
  linalg::Vec a, b, c;
};
LiftedNeuron lift_neuron(const spectral::SpectralBasis& basis, const linalg::Vec& v,
                         double w, int n0);

}  // namespace gclab::conv
