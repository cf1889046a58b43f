#include "gclab/conv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "gclab/error.hpp"

namespace gclab::conv {

double FilterPoly::eval(const std::vector<double>& lambda) const {
  if (static_cast<int>(lambda.size()) != num_vars)
    throw InvalidInput("FilterPoly::eval: wrong number of variables");
  double s = 0.0;
  for (const auto& [e, coeff] : terms) {
    double term = coeff;
    for (int k = 0; k < num_vars; ++k)
      for (int p = 0; p < e[k]; ++p) term *= lambda[k];
    s += term;
  }
  return s;
}

FilterPoly FilterPoly::from_coeffs(const std::vector<double>& coeffs) {
  if (coeffs.empty()) throw InvalidInput("FilterPoly::from_coeffs: empty coefficients");
  FilterPoly h;
  h.num_vars = 1;
  h.degree = static_cast<int>(coeffs.size()) - 1;
  for (int l = 0; l < static_cast<int>(coeffs.size()); ++l)
    if (coeffs[l] != 0.0 || l == 0) h.terms[{l}] = coeffs[l];
  return h;
}

std::vector<double> FilterPoly::coeffs() const {
  if (num_vars != 1) throw InvalidInput("FilterPoly::coeffs: univariate only");
  std::vector<double> c(degree + 1, 0.0);
  for (const auto& [e, coeff] : terms) c[e[0]] = coeff;
  return c;
}

ConvKernel make_kernel(const spectral::SpectralBasis& basis, const linalg::Vec& b) {
  if (static_cast<int>(b.size()) != basis.n)
    throw InvalidInput("make_kernel: signal size must equal graph order");
  ConvKernel k;
  k.b = b;
  k.beta = spectral::gft(basis, b);
  const int n = basis.n;
  k.c_mat = linalg::Mat(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += basis.u(i, t) * k.beta[t] * basis.u(j, t);
      k.c_mat(i, j) = s;
    }
  return k;
}

linalg::Vec convolve(const ConvKernel& kernel, const linalg::Vec& x) {
  return linalg::matvec(kernel.c_mat, x);
}

linalg::Vec convolve(const spectral::SpectralBasis& basis, const linalg::Vec& b,
                     const linalg::Vec& x) {
  linalg::Vec beta = spectral::gft(basis, b);
  linalg::Vec xh = spectral::gft(basis, x);
  for (int i = 0; i < basis.n; ++i) xh[i] *= beta[i];
  return spectral::igft(basis, xh);
}

namespace {

// Multi-indices with num_vars entries and total degree <= max_degree in
// graded lexicographic order.
std::vector<std::vector<int>> graded_exponents(int num_vars, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(num_vars, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == num_vars - 1) {
      cur[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      rec(pos + 1, remaining - v);
    }
  };
  for (int total = 0; total <= max_degree; ++total) rec(0, total);
  return out;
}

// Newton interpolation through (nodes, values), expanded to monomial
// coefficients. Nodes are Leja-ordered first: this keeps the divided
// differences and the expansion well behaved on clustered spectra.
std::vector<double> newton_monomial(std::vector<double> nodes, std::vector<double> values) {
  const int n = static_cast<int>(nodes.size());
  std::vector<int> order;
  order.reserve(n);
  {
    std::vector<char> used(n, 0);
    int first = 0;
    for (int i = 1; i < n; ++i)
      if (std::fabs(nodes[i]) > std::fabs(nodes[first])) first = i;
    order.push_back(first);
    used[first] = 1;
    std::vector<double> logdist(n, 0.0);
    for (int step = 1; step < n; ++step) {
      const int prev = order.back();
      int best = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        const double d = std::fabs(nodes[i] - nodes[prev]);
        logdist[i] += d > 0.0 ? std::log(d) : -745.0;
        if (logdist[i] > best_score) {
          best_score = logdist[i];
          best = i;
        }
      }
      order.push_back(best);
      used[best] = 1;
    }
  }
  std::vector<double> t(n), f(n);
  for (int i = 0; i < n; ++i) {
    t[i] = nodes[order[i]];
    f[i] = values[order[i]];
  }

  std::vector<double> dd = f;
  for (int j = 1; j < n; ++j) {
    for (int i = n - 1; i >= j; --i) {
      const double denom = t[i] - t[i - j];
      if (denom == 0.0)
        throw NumericalError("filter_from_signal: repeated interpolation nodes");
      dd[i] = (dd[i] - dd[i - 1]) / denom;
    }
  }

  // Horner-style expansion of the Newton form: coef <- coef * (x - t[j]) + dd[j].
  std::vector<double> coef(n, 0.0);
  coef[0] = dd[n - 1];
  int deg = 0;
  for (int j = n - 2; j >= 0; --j) {
    std::vector<double> next(deg + 2, 0.0);
    for (int p = 0; p <= deg; ++p) {
      next[p + 1] += coef[p];
      next[p] -= t[j] * coef[p];
    }
    next[0] += dd[j];
    ++deg;
    for (int p = 0; p <= deg; ++p) coef[p] = next[p];
  }
  return coef;
}

double shift_norm_weight(const spectral::SpectralBasis& basis, const std::vector<int>& e) {
  double w = 1.0;
  for (int k = 0; k < basis.k; ++k)
    for (int p = 0; p < e[k]; ++p) w *= basis.shift_norms[k];
  return w;
}

}  // namespace

FilterPoly filter_from_signal(const spectral::SpectralBasis& basis, const linalg::Vec& b,
                              int max_degree) {
  if (static_cast<int>(b.size()) != basis.n)
    throw InvalidInput("filter_from_signal: signal size must equal graph order");
  if (max_degree < 0) throw InvalidInput("filter_from_signal: max_degree must be >= 0");
  if (!basis.assumption1_ok)
    throw NumericalError(
        "filter_from_signal: joint spectrum not distinct (gap below 1e-10); "
        "interpolation refused");

  const linalg::Vec beta = spectral::gft(basis, b);
  const double tol = 1e-8 * linalg::norm_inf(beta);

  if (basis.k == 1 && max_degree >= basis.n - 1) {
    std::vector<double> nodes(basis.n);
    for (int i = 0; i < basis.n; ++i) nodes[i] = basis.spectrum(i, 0);
    const std::vector<double> coef = newton_monomial(nodes, beta);
    FilterPoly h = FilterPoly::from_coeffs(coef);
    double resid = 0.0;
    for (int i = 0; i < basis.n; ++i)
      resid = std::max(resid, std::fabs(h.eval({nodes[i]}) - beta[i]));
    if (!(resid <= std::max(tol, 1e-30)))
      throw NumericalError("filter_from_signal: interpolation residual " +
                           std::to_string(resid) + " exceeds tolerance");
    return h;
  }

  const auto exps = graded_exponents(basis.k, max_degree);
  linalg::Mat v(basis.n, exps.size(), 0.0);
  for (int i = 0; i < basis.n; ++i) {
    for (std::size_t c = 0; c < exps.size(); ++c) {
      double term = 1.0;
      for (int k = 0; k < basis.k; ++k)
        for (int p = 0; p < exps[c][k]; ++p) term *= basis.spectrum(i, k);
      v(i, c) = term;
    }
  }
  const linalg::Vec h = linalg::solve_least_squares(v, beta);
  double resid = 0.0;
  for (int i = 0; i < basis.n; ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < exps.size(); ++c) fit += v(i, c) * h[c];
    resid = std::max(resid, std::fabs(fit - beta[i]));
  }
  if (!(resid <= std::max(tol, 1e-30)))
    throw NumericalError("filter_from_signal: exact interpolation unavailable at degree " +
                         std::to_string(max_degree) + " (residual " + std::to_string(resid) +
                         ")");
  FilterPoly out;
  out.num_vars = basis.k;
  out.degree = max_degree;
  for (std::size_t c = 0; c < exps.size(); ++c)
    if (h[c] != 0.0 || exps[c] == std::vector<int>(basis.k, 0)) out.terms[exps[c]] = h[c];
  return out;
}

linalg::Vec signal_from_filter(const spectral::SpectralBasis& basis, const FilterPoly& h) {
  if (h.num_vars != basis.k)
    throw InvalidInput("signal_from_filter: filter arity must match basis shifts");
  linalg::Vec vals(basis.n, 0.0);
  std::vector<double> lambda(basis.k);
  for (int i = 0; i < basis.n; ++i) {
    for (int k = 0; k < basis.k; ++k) lambda[k] = basis.spectrum(i, k);
    vals[i] = h.eval(lambda);
  }
  return spectral::igft(basis, vals);
}

WlBasis wl_basis(const spectral::SpectralBasis& basis, int max_total_degree) {
  if (max_total_degree < 0) throw InvalidInput("wl_basis: degree must be >= 0");
  WlBasis out;
  out.exponents = graded_exponents(basis.k, max_total_degree);

  // one = U 1 in the spectral domain is just the all-ones coefficient vector
  linalg::Vec ones(basis.n, 1.0);
  linalg::Mat v(basis.n, out.exponents.size(), 0.0);
  for (std::size_t c = 0; c < out.exponents.size(); ++c) {
    linalg::Vec coeff(basis.n, 0.0);
    for (int i = 0; i < basis.n; ++i) {
      double term = 1.0;
      for (int k = 0; k < basis.k; ++k)
        for (int p = 0; p < out.exponents[c][k]; ++p) term *= basis.spectrum(i, k);
      coeff[i] = term;
      v(i, c) = term;
    }
    out.signals.push_back(spectral::igft(basis, coeff));
  }

  const linalg::Vec sv = linalg::singular_values(v);
  const double cutoff = 1e-10 * (sv.empty() ? 0.0 : sv[0]);
  int rank = 0;
  for (double s : sv)
    if (s > cutoff && s > 0.0) ++rank;
  out.rank = rank;
  return out;
}

double conv_norm(const spectral::SpectralBasis& basis, const linalg::Vec& b,
                 ConvNormKind kind, double d3) {
  if (kind == ConvNormKind::cofi) {
    // cofi needs a polynomial representation; derive one.
    return conv_norm(basis, filter_from_signal(basis, b, basis.n - 1), kind, d3);
  }
  const linalg::Vec beta = spectral::gft(basis, b);
  if (kind == ConvNormKind::coop2) return d3 * linalg::norm_inf(beta);
  const ConvKernel k = make_kernel(basis, b);
  if (kind == ConvNormKind::coop1) return d3 * linalg::induced_norm_1(k.c_mat);
  return d3 * linalg::induced_norm_inf(k.c_mat);
}

double conv_norm(const spectral::SpectralBasis& basis, const FilterPoly& h,
                 ConvNormKind kind, double d3) {
  if (h.num_vars != basis.k)
    throw InvalidInput("conv_norm: filter arity must match basis shifts");
  if (kind == ConvNormKind::cofi) {
    double s = 0.0;
    for (const auto& [e, coeff] : h.terms) s += std::fabs(coeff) * shift_norm_weight(basis, e);
    return d3 * s;
  }
  return conv_norm(basis, signal_from_filter(basis, h), kind, d3);
}

LiftedNeuron lift_neuron(const spectral::SpectralBasis& basis, const linalg::Vec& v,
                         double w, int n0) {
  if (static_cast<int>(v.size()) != basis.n)
    throw InvalidInput("lift_neuron: v size must equal graph order");
  if (n0 < 0 || n0 >= basis.n) throw InvalidInput("lift_neuron: n0 out of range");
  for (int n = 0; n < basis.n; ++n)
    if (std::fabs(basis.u(n0, n)) < 1e-8)
      throw NumericalError("lift_neuron: |U(n0, n)| below 1e-8 at spectral index " +
                           std::to_string(n + 1) + "; lifting unavailable for this row");

  const linalg::Vec vh = spectral::gft(basis, v);
  linalg::Vec bh(basis.n, 0.0);
  for (int n = 0; n < basis.n; ++n) bh[n] = vh[n] / basis.u(n0, n);

  LiftedNeuron out;
  out.a.assign(basis.n, 0.0);
  out.a[n0] = 1.0;
  out.c.assign(basis.n, 0.0);
  out.c[n0] = w;
  out.b = spectral::igft(basis, bh);
  return out;
}

}  // namespace gclab::conv
