#include "gclab/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "gclab/error.hpp"
#include "gclab/kernels.hpp"
#include "json.hpp"

namespace gclab::model {

double NormConfig::dual_p() const {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (p == 2.0) return 2.0;
  if (std::isinf(p) && p > 0) return 1.0;
  throw InvalidInput("norm order must be 1, 2 or inf, got " + std::to_string(p));
}

std::pair<double, double> relu_smooth(double t, double eps) {
  if (!(eps > 0)) throw InvalidInput("smoothing width must be positive");
  if (t >= eps) return {t, 1.0};
  if (t <= -eps) return {0.0, 0.0};
  const double s = t + eps;
  return {s * s / (4.0 * eps), s / (2.0 * eps)};
}

double activate(double t, Activation act, double eps) {
  if (act == Activation::relu) return t > 0.0 ? t : 0.0;
  return relu_smooth(t, eps).first;
}

void check_params(const spectral::SpectralBasis& basis, const NetworkParams& params) {
  if (params.neurons.empty()) throw InvalidInput("network has no neurons");
  const int n = basis.n;
  if (params.mode == ConvMode::poly_filter) {
    if (basis.k != 1)
      throw InvalidInput("poly_filter mode needs a single shift, basis has " +
                         std::to_string(basis.k));
    if (params.degree < 0) throw InvalidInput("filter degree must be nonnegative");
  }
  const std::size_t blen = params.mode == ConvMode::poly_filter
                               ? static_cast<std::size_t>(params.degree) + 1
                               : static_cast<std::size_t>(n);
  for (int m = 0; m < params.m(); ++m) {
    const Neuron& nu = params.neurons[m];
    if (nu.a.size() != static_cast<std::size_t>(n) || nu.c.size() != static_cast<std::size_t>(n) ||
        nu.b.size() != blen)
      throw InvalidInput("neuron " + std::to_string(m) + " has mismatched shapes");
  }
}

double forward(const spectral::SpectralBasis& basis, const NetworkParams& params,
               const linalg::Vec& x) {
  if (x.size() != static_cast<std::size_t>(basis.n))
    throw InvalidInput("signal length does not match graph order");
  kernels::BatchData data = kernels::make_batch(basis, {x}, params.mode, params.degree);
  return kernels::batch_forward_serial(basis, params, data)[0];
}

double neuron_path_norm(const spectral::SpectralBasis& basis, const NetworkParams& params,
                        int m, const NormConfig& cfg) {
  if (m < 0 || m >= params.m()) throw InvalidInput("neuron index out of range");
  const Neuron& nu = params.neurons[m];
  const double a_dual = linalg::vec_norm(nu.a, cfg.dual_p());
  const double c_norm = linalg::vec_norm(nu.c, cfg.p);
  double b_co;
  if (params.mode == ConvMode::spectral_signal) {
    b_co = conv::conv_norm(basis, nu.b, cfg.conv_kind, cfg.d3);
  } else {
    b_co = conv::conv_norm(basis, conv::FilterPoly::from_coeffs(nu.b),
                           conv::ConvNormKind::cofi, cfg.d3);
  }
  return a_dual * (b_co + c_norm);
}

double path_norm(const spectral::SpectralBasis& basis, const NetworkParams& params,
                 double p, const NormConfig& cfg) {
  check_params(basis, params);
  if (!(p == 1.0 || p == 2.0 || (std::isinf(p) && p > 0)))
    throw InvalidInput("path norm order must be 1, 2 or inf");
  const int m = params.m();
  if (std::isinf(p)) {
    double best = 0.0;
    for (int j = 0; j < m; ++j) best = std::max(best, neuron_path_norm(basis, params, j, cfg));
    return best;
  }
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += std::pow(neuron_path_norm(basis, params, j, cfg), p);
  return std::pow(acc / m, 1.0 / p);
}

namespace {

linalg::Vec predictions(const spectral::SpectralBasis& basis, const NetworkParams& params,
                        const std::vector<linalg::Vec>& xs) {
  check_params(basis, params);
  if (xs.empty()) throw InvalidInput("empty sample batch");
  kernels::BatchData data = kernels::make_batch(basis, xs, params.mode, params.degree);
  return kernels::batch_forward(basis, params, data);
}

}  // namespace

double rmse(const spectral::SpectralBasis& basis, const NetworkParams& params,
            const std::vector<linalg::Vec>& xs, const linalg::Vec& y) {
  if (y.size() != xs.size()) throw InvalidInput("target length does not match batch");
  linalg::Vec f = predictions(basis, params, xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = y[i] - f[i];
    num += z * z;
    den += y[i] * y[i];
  }
  if (den == 0.0) throw InvalidInput("relative MSE undefined for all-zero targets");
  return num / den;
}

double ruae(const spectral::SpectralBasis& basis, const NetworkParams& params,
            const std::vector<linalg::Vec>& xs, const linalg::Vec& y) {
  if (y.size() != xs.size()) throw InvalidInput("target length does not match batch");
  linalg::Vec f = predictions(basis, params, xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num = std::max(num, std::fabs(y[i] - f[i]));
    den = std::max(den, std::fabs(y[i]));
  }
  return num / (den + 1e-6);
}

Gradient grad(const spectral::SpectralBasis& basis, const NetworkParams& params,
              const std::vector<linalg::Vec>& xs, const linalg::Vec& y) {
  check_params(basis, params);
  if (xs.empty()) throw InvalidInput("empty sample batch");
  if (y.size() != xs.size()) throw InvalidInput("target length does not match batch");
  kernels::BatchData data = kernels::make_batch(basis, xs, params.mode, params.degree);
  return kernels::batch_grad(basis, params, data, y).grad;
}

namespace {

using nlohmann::json;

json vec_to_json(const linalg::Vec& v, bool hex) {
  json out = json::array();
  for (double x : v) {
    if (hex) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%a", x);
      out.push_back(std::string(buf));
    } else {
      out.push_back(x);
    }
  }
  return out;
}

linalg::Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array");
  linalg::Vec v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (e.is_number()) {
      v.push_back(e.get<double>());
    } else if (e.is_string()) {
      const std::string s = e.get<std::string>();
      char* end = nullptr;
      const double x = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
        throw InvalidInput(std::string(what) + ": unparseable number '" + s + "'");
      v.push_back(x);
    } else {
      throw InvalidInput(std::string(what) + " entries must be numbers or numeric strings");
    }
  }
  return v;
}

const char* mode_name(ConvMode m) {
  return m == ConvMode::spectral_signal ? "spectral_signal" : "poly_filter";
}

ConvMode mode_from_name(const std::string& s) {
  if (s == "spectral_signal") return ConvMode::spectral_signal;
  if (s == "poly_filter") return ConvMode::poly_filter;
  throw InvalidInput("unknown conv mode '" + s + "'");
}

}  // namespace

std::string to_json(const NetworkParams& params, bool hex_floats) {
  json j;
  j["mode"] = mode_name(params.mode);
  j["degree"] = params.degree;
  j["eps"] = params.eps;
  j["activation"] = params.activation == Activation::relu ? "relu" : "smoothed";
  json neurons = json::array();
  for (const Neuron& nu : params.neurons) {
    json jn;
    jn["a"] = vec_to_json(nu.a, hex_floats);
    jn["b"] = vec_to_json(nu.b, hex_floats);
    jn["c"] = vec_to_json(nu.c, hex_floats);
    neurons.push_back(std::move(jn));
  }
  j["neurons"] = std::move(neurons);
  return j.dump(2);
}

NetworkParams params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad network JSON: ") + e.what());
  }
  try {
    NetworkParams p;
    p.mode = mode_from_name(j.at("mode").get<std::string>());
    p.degree = j.at("degree").get<int>();
    p.eps = j.value("eps", 1e-5);
    const std::string act = j.value("activation", std::string("relu"));
    if (act == "relu") {
      p.activation = Activation::relu;
    } else if (act == "smoothed") {
      p.activation = Activation::smoothed;
    } else {
      throw InvalidInput("unknown activation '" + act + "'");
    }
    for (const auto& jn : j.at("neurons")) {
      Neuron nu;
      nu.a = vec_from_json(jn.at("a"), "a");
      nu.b = vec_from_json(jn.at("b"), "b");
      nu.c = vec_from_json(jn.at("c"), "c");
      p.neurons.push_back(std::move(nu));
    }
    return p;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad network JSON: ") + e.what());
  }
}

}  // namespace gclab::model
