#include "gclab/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gclab/error.hpp"

namespace gclab::kernels {

namespace {

using model::ConvMode;
using model::NetworkParams;
using model::Neuron;

// Preactivation b_m * x_i + c_m. Polynomial filters consume the precomputed
// shift powers; signal filters go through the spectral route with the
// neuron's cached transform beta_m.
void preactivation(const spectral::SpectralBasis& basis, const NetworkParams& params,
                   const BatchData& data, const std::vector<linalg::Vec>& betas, int i, int m,
                   double* pre) {
  const Neuron& nu = params.neurons[m];
  const int n = data.n;
  if (data.mode == ConvMode::poly_filter) {
    for (int v = 0; v < n; ++v) pre[v] = nu.c[v];
    for (int l = 0; l <= data.degree; ++l) {
      const double w = nu.b[l];
      if (w == 0.0) continue;
      const double* p = data.power(i, l);
      for (int v = 0; v < n; ++v) pre[v] += w * p[v];
    }
  } else {
    const linalg::Vec& beta = betas[m];
    const double* xh = data.hat(i);
    const double* u = basis.u.data();
    for (int v = 0; v < n; ++v) {
      double acc = 0.0;
      const double* urow = u + static_cast<std::size_t>(v) * n;
      for (int f = 0; f < n; ++f) acc += urow[f] * beta[f] * xh[f];
      pre[v] = acc + nu.c[v];
    }
  }
}

double sample_forward(const spectral::SpectralBasis& basis, const NetworkParams& params,
                      const BatchData& data, const std::vector<linalg::Vec>& betas, int i,
                      double* pre) {
  const int n = data.n;
  double f = 0.0;
  for (int m = 0; m < params.m(); ++m) {
    preactivation(basis, params, data, betas, i, m, pre);
    const Neuron& nu = params.neurons[m];
    double acc = 0.0;
    for (int v = 0; v < n; ++v)
      acc += nu.a[v] * model::activate(pre[v], params.activation, params.eps);
    f += acc;
  }
  return f / params.m();
}

std::vector<linalg::Vec> neuron_betas(const spectral::SpectralBasis& basis,
                                      const NetworkParams& params) {
  std::vector<linalg::Vec> betas;
  if (params.mode == ConvMode::spectral_signal) {
    betas.reserve(params.neurons.size());
    for (const Neuron& nu : params.neurons) betas.push_back(spectral::gft(basis, nu.b));
  }
  return betas;
}

void check_batch(const spectral::SpectralBasis& basis, const NetworkParams& params,
                 const BatchData& data) {
  model::check_params(basis, params);
  if (data.n != basis.n) throw InvalidInput("batch was built for a different graph order");
  if (data.mode != params.mode) throw InvalidInput("batch was built for a different conv mode");
  if (data.mode == ConvMode::poly_filter && data.degree != params.degree)
    throw InvalidInput("batch was built for filter degree " + std::to_string(data.degree) +
                       ", parameters have " + std::to_string(params.degree));
}

// Unscaled per-sample gradient contributions of neuron m occupy a
// [a (n) | c (n) | b (degree+1)] slice of the sample's slab row; the final
// gradient is -2/(M ||y||^2) times the index-ordered sum of the rows times
// their residuals.
void sample_grad_row(const spectral::SpectralBasis& basis, const NetworkParams& params,
                     const BatchData& data, int i, double y_i, double* row, double* z_out,
                     double* pre) {
  const int n = data.n;
  const int lb = data.degree + 1;
  const int stride = 2 * n + lb;
  double f = 0.0;
  for (int m = 0; m < params.m(); ++m) {
    preactivation(basis, params, data, {}, i, m, pre);
    const Neuron& nu = params.neurons[m];
    double* ga = row + static_cast<std::size_t>(m) * stride;
    double* gc = ga + n;
    double* gb = gc + n;
    double acc = 0.0;
    for (int v = 0; v < n; ++v) {
      const double val = model::activate(pre[v], params.activation, params.eps);
      acc += nu.a[v] * val;
      ga[v] = val;
      gc[v] = nu.a[v] * model::relu_smooth(pre[v], params.eps).second;
    }
    for (int l = 0; l < lb; ++l) {
      const double* p = data.power(i, l);
      double dacc = 0.0;
      for (int v = 0; v < n; ++v) dacc += gc[v] * p[v];
      gb[l] = dacc;
    }
    f += acc;
  }
  const double z = y_i - f / params.m();
  *z_out = z;
  const std::size_t rowlen = static_cast<std::size_t>(params.m()) * stride;
  for (std::size_t t = 0; t < rowlen; ++t) row[t] *= z;
}

}  // namespace

BatchData make_batch(const spectral::SpectralBasis& basis, const std::vector<linalg::Vec>& xs,
                     model::ConvMode mode, int degree) {
  if (xs.empty()) throw InvalidInput("empty sample batch");
  const int n = basis.n;
  for (const linalg::Vec& x : xs)
    if (x.size() != static_cast<std::size_t>(n))
      throw InvalidInput("signal length does not match graph order");
  BatchData data;
  data.mode = mode;
  data.s = static_cast<int>(xs.size());
  data.n = n;
  if (mode == ConvMode::poly_filter) {
    if (basis.k != 1) throw InvalidInput("poly_filter mode needs a single shift");
    if (degree < 0) throw InvalidInput("filter degree must be nonnegative");
    data.degree = degree;
    data.powers.assign(static_cast<std::size_t>(data.s) * (degree + 1) * n, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < data.s; ++i) {
      linalg::Vec xh = spectral::gft(basis, xs[i]);
      linalg::Vec lam_pow(n, 1.0);
      linalg::Vec tmp(n);
      for (int l = 0; l <= degree; ++l) {
        for (int f = 0; f < n; ++f) tmp[f] = lam_pow[f] * xh[f];
        linalg::Vec p = spectral::igft(basis, tmp);
        double* dst = data.powers.data() + (static_cast<std::size_t>(i) * (degree + 1) + l) * n;
        for (int v = 0; v < n; ++v) dst[v] = p[v];
        for (int f = 0; f < n; ++f) lam_pow[f] *= basis.spectrum(f, 0);
      }
    }
  } else {
    data.xhat.assign(static_cast<std::size_t>(data.s) * n, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < data.s; ++i) {
      linalg::Vec xh = spectral::gft(basis, xs[i]);
      double* dst = data.xhat.data() + static_cast<std::size_t>(i) * n;
      for (int v = 0; v < n; ++v) dst[v] = xh[v];
    }
  }
  return data;
}

linalg::Vec batch_forward(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                          const BatchData& data) {
  check_batch(basis, params, data);
  const std::vector<linalg::Vec> betas = neuron_betas(basis, params);
  linalg::Vec out(data.s, 0.0);
#pragma omp parallel
  {
    linalg::Vec pre(data.n);
#pragma omp for schedule(static)
    for (int i = 0; i < data.s; ++i)
      out[i] = sample_forward(basis, params, data, betas, i, pre.data());
  }
  return out;
}

linalg::Vec batch_forward_serial(const spectral::SpectralBasis& basis,
                                 const model::NetworkParams& params, const BatchData& data) {
  check_batch(basis, params, data);
  const std::vector<linalg::Vec> betas = neuron_betas(basis, params);
  linalg::Vec out(data.s, 0.0);
  linalg::Vec pre(data.n);
  for (int i = 0; i < data.s; ++i)
    out[i] = sample_forward(basis, params, data, betas, i, pre.data());
  return out;
}

namespace {

BatchGrad reduce_grad(const model::NetworkParams& params, const BatchData& data,
                      const linalg::Vec& y, const std::vector<double>& slab,
                      const linalg::Vec& z) {
  const int n = data.n;
  const int lb = data.degree + 1;
  const int stride = 2 * n + lb;
  const int m = params.m();
  const std::size_t rowlen = static_cast<std::size_t>(m) * stride;

  BatchGrad out;
  out.residuals = z;
  out.grad.neurons.assign(m, Neuron{linalg::Vec(n, 0.0), linalg::Vec(lb, 0.0), linalg::Vec(n, 0.0)});

  double ynorm2 = 0.0;
  for (double v : y) ynorm2 += v * v;
  if (ynorm2 == 0.0) throw InvalidInput("relative MSE undefined for all-zero targets");

  for (int i = 0; i < data.s; ++i) {
    const double* row = slab.data() + static_cast<std::size_t>(i) * rowlen;
    for (int j = 0; j < m; ++j) {
      Neuron& g = out.grad.neurons[j];
      const double* ga = row + static_cast<std::size_t>(j) * stride;
      const double* gc = ga + n;
      const double* gb = gc + n;
      for (int v = 0; v < n; ++v) g.a[v] += ga[v];
      for (int v = 0; v < n; ++v) g.c[v] += gc[v];
      for (int l = 0; l < lb; ++l) g.b[l] += gb[l];
    }
  }
  double loss = 0.0;
  for (int i = 0; i < data.s; ++i) loss += z[i] * z[i];
  out.loss = loss / ynorm2;

  const double coef = -2.0 / (m * ynorm2);
  for (Neuron& g : out.grad.neurons) {
    for (double& v : g.a) v *= coef;
    for (double& v : g.c) v *= coef;
    for (double& v : g.b) v *= coef;
  }
  return out;
}

}  // namespace

BatchGrad batch_grad(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                     const BatchData& data, const linalg::Vec& y, bool deterministic) {
  check_batch(basis, params, data);
  if (params.mode != ConvMode::poly_filter)
    throw InvalidInput("analytic gradients are only defined in poly_filter mode");
  if (y.size() != static_cast<std::size_t>(data.s))
    throw InvalidInput("target length does not match batch");

  const int n = data.n;
  const int lb = data.degree + 1;
  const int stride = 2 * n + lb;
  const std::size_t rowlen = static_cast<std::size_t>(params.m()) * stride;

#ifdef _OPENMP
  if (!deterministic) {
    // Per-thread accumulators merged in thread order: cheaper on memory, but
    // the summation order depends on the thread count.
    const int nthreads = omp_get_max_threads();
    std::vector<std::vector<double>> partial(nthreads, std::vector<double>(rowlen, 0.0));
    std::vector<double> partial_z2(nthreads, 0.0);
    linalg::Vec z(data.s, 0.0);
#pragma omp parallel
    {
      const int t = omp_get_thread_num();
      linalg::Vec pre(n);
      std::vector<double> row(rowlen);
#pragma omp for schedule(static)
      for (int i = 0; i < data.s; ++i) {
        sample_grad_row(basis, params, data, i, y[i], row.data(), &z[i], pre.data());
        for (std::size_t u = 0; u < rowlen; ++u) partial[t][u] += row[u];
        partial_z2[t] += z[i] * z[i];
      }
    }
    std::vector<double> total(rowlen, 0.0);
    for (int t = 0; t < nthreads; ++t)
      for (std::size_t u = 0; u < rowlen; ++u) total[u] += partial[t][u];

    // Repackage through the shared reducer by treating the merged row as a
    // single sample with residual 1.
    BatchData one;
    one.mode = data.mode;
    one.n = data.n;
    one.degree = data.degree;
    one.s = 1;
    BatchGrad out = reduce_grad(params, one, y, total, linalg::Vec{1.0});
    out.residuals = z;
    double loss = 0.0;
    for (int t = 0; t < nthreads; ++t) loss += partial_z2[t];
    double ynorm2 = 0.0;
    for (double v : y) ynorm2 += v * v;
    out.loss = loss / ynorm2;
    return out;
  }
#else
  (void)deterministic;
#endif

  std::vector<double> slab(static_cast<std::size_t>(data.s) * rowlen, 0.0);
  linalg::Vec z(data.s, 0.0);
#pragma omp parallel
  {
    linalg::Vec pre(n);
#pragma omp for schedule(static)
    for (int i = 0; i < data.s; ++i)
      sample_grad_row(basis, params, data, i, y[i],
                      slab.data() + static_cast<std::size_t>(i) * rowlen, &z[i], pre.data());
  }
  return reduce_grad(params, data, y, slab, z);
}

BatchGrad batch_grad_serial(const spectral::SpectralBasis& basis,
                            const model::NetworkParams& params, const BatchData& data,
                            const linalg::Vec& y) {
  check_batch(basis, params, data);
  if (params.mode != ConvMode::poly_filter)
    throw InvalidInput("analytic gradients are only defined in poly_filter mode");
  if (y.size() != static_cast<std::size_t>(data.s))
    throw InvalidInput("target length does not match batch");

  const int n = data.n;
  const int lb = data.degree + 1;
  const int stride = 2 * n + lb;
  const std::size_t rowlen = static_cast<std::size_t>(params.m()) * stride;

  std::vector<double> slab(static_cast<std::size_t>(data.s) * rowlen, 0.0);
  linalg::Vec z(data.s, 0.0);
  linalg::Vec pre(n);
  for (int i = 0; i < data.s; ++i)
    sample_grad_row(basis, params, data, i, y[i],
                    slab.data() + static_cast<std::size_t>(i) * rowlen, &z[i], pre.data());
  return reduce_grad(params, data, y, slab, z);
}

}  // namespace gclab::kernels
