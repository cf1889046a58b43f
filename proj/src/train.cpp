#include "gclab/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gclab/fmt.hpp"
#include "gclab/rng.hpp"
#include "json.hpp"

namespace gclab::train {

namespace {

using model::Gradient;
using model::NetworkParams;
using model::Neuron;

void validate(const TrainConfig& cfg) {
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    throw InvalidInput("momentum must lie in [0, 1)");
  if (!(cfg.learning_rate >= 0.0)) throw InvalidInput("learning rate must be nonnegative");
  if (cfg.iterations < 1) throw InvalidInput("iteration count must be at least 1");
  if (cfg.record_every < 1) throw InvalidInput("record stride must be at least 1");
  if (cfg.init == InitKind::uniform && !(cfg.init_scale > 0.0))
    throw InvalidInput("uniform init needs a positive scale");
  if (!(cfg.eps > 0.0)) throw InvalidInput("smoothing width must be positive");
  if (cfg.batch_size < 0) throw InvalidInput("batch size must be nonnegative");
}

void update_temp(Gradient& temp, double mu, const Gradient& g) {
  for (std::size_t j = 0; j < temp.neurons.size(); ++j) {
    Neuron& t = temp.neurons[j];
    const Neuron& s = g.neurons[j];
    for (std::size_t i = 0; i < t.a.size(); ++i) t.a[i] = mu * t.a[i] + s.a[i];
    for (std::size_t i = 0; i < t.b.size(); ++i) t.b[i] = mu * t.b[i] + s.b[i];
    for (std::size_t i = 0; i < t.c.size(); ++i) t.c[i] = mu * t.c[i] + s.c[i];
  }
}

void apply_step(NetworkParams& theta, double gamma, const Gradient& temp) {
  for (std::size_t j = 0; j < theta.neurons.size(); ++j) {
    Neuron& p = theta.neurons[j];
    const Neuron& t = temp.neurons[j];
    for (std::size_t i = 0; i < p.a.size(); ++i) p.a[i] = p.a[i] - gamma * t.a[i];
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] = p.b[i] - gamma * t.b[i];
    for (std::size_t i = 0; i < p.c.size(); ++i) p.c[i] = p.c[i] - gamma * t.c[i];
  }
}

double relative_mse(const linalg::Vec& f, const linalg::Vec& y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = y[i] - f[i];
    num += z * z;
    den += y[i] * y[i];
  }
  return num / den;
}

}  // namespace

model::NetworkParams init_params(const NetShape& shape, const TrainConfig& cfg) {
  if (shape.m < 1 || shape.degree < 0 || shape.n < 1)
    throw InvalidInput("network shape must have m >= 1, degree >= 0, n >= 1");
  NetworkParams params;
  params.mode = model::ConvMode::poly_filter;
  params.degree = shape.degree;
  params.eps = cfg.eps;
  params.activation = model::Activation::relu;
  params.neurons.assign(shape.m, Neuron{linalg::Vec(shape.n, 0.0),
                                        linalg::Vec(shape.degree + 1, 0.0),
                                        linalg::Vec(shape.n, 0.0)});
  if (cfg.init == InitKind::uniform) {
    Rng rng(cfg.seed);
    for (Neuron& nu : params.neurons) {
      for (double& v : nu.a) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
      for (double& v : nu.b) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
      for (double& v : nu.c) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
    }
  }
  return params;
}

Trajectory sgdm_from(const spectral::SpectralBasis& basis, const std::vector<linalg::Vec>& xs,
                     const linalg::Vec& y, const model::NetworkParams& theta0,
                     const TrainConfig& cfg) {
  validate(cfg);
  model::check_params(basis, theta0);
  if (theta0.mode != model::ConvMode::poly_filter)
    throw InvalidInput("training requires poly_filter mode");
  if (y.size() != xs.size()) throw InvalidInput("target length does not match batch");
  const int s = static_cast<int>(xs.size());
  if (cfg.batch_size > s) throw InvalidInput("batch size exceeds the sample count");
  double ynorm2 = 0.0;
  for (double v : y) ynorm2 += v * v;
  if (!(ynorm2 > 0.0)) throw InvalidInput("training targets must not all be zero");

  const kernels::BatchData data = kernels::make_batch(basis, xs, theta0.mode, theta0.degree);
  const bool full = cfg.batch_size == 0 || cfg.batch_size == s;
  const int lb = theta0.degree + 1;
  const int n = data.n;
  Rng draw_rng(cfg.seed + 0x9e3779b97f4a7c15ULL);  // subsample stream, distinct from init

  NetworkParams theta = theta0;
  Trajectory traj;

  auto full_loss = [&](const NetworkParams& th) {
    return relative_mse(kernels::batch_forward(basis, th, data), y);
  };
  auto guard = [&](int iter, double loss) {
    if (!(loss <= 1e6)) {
      traj.params_final = theta;
      throw DivergedError("relative MSE " + fmt::format_double(loss) + " at iteration " +
                              std::to_string(iter) + " exceeds the divergence guard",
                          traj);
    }
  };
  auto step_grad = [&](const NetworkParams& th) {
    if (full) return kernels::batch_grad(basis, th, data, y, cfg.deterministic);
    std::vector<int> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    for (int j = 0; j < cfg.batch_size; ++j)
      std::swap(idx[j], idx[j + static_cast<int>(draw_rng.uniform_int(0, s - 1 - j))]);
    kernels::BatchData sub;
    sub.mode = data.mode;
    sub.n = n;
    sub.degree = data.degree;
    sub.s = cfg.batch_size;
    sub.powers.resize(static_cast<std::size_t>(sub.s) * lb * n);
    linalg::Vec ysub(sub.s);
    for (int j = 0; j < sub.s; ++j) {
      std::copy_n(data.powers.data() + static_cast<std::size_t>(idx[j]) * lb * n,
                  static_cast<std::size_t>(lb) * n,
                  sub.powers.data() + static_cast<std::size_t>(j) * lb * n);
      ysub[j] = y[idx[j]];
    }
    return kernels::batch_grad(basis, th, sub, ysub, cfg.deterministic);
  };

  kernels::BatchGrad g0 = step_grad(theta);
  const double loss0 = full ? g0.loss : full_loss(theta);
  guard(0, loss0);
  traj.losses.emplace_back(0, loss0);
  Gradient temp = g0.grad;

  for (int t = 1; t <= cfg.iterations; ++t) {
    kernels::BatchGrad bg = step_grad(theta);
    const int iter = t - 1;
    if (iter > 0 && iter % cfg.record_every == 0) {
      const double loss = full ? bg.loss : full_loss(theta);
      guard(iter, loss);
      traj.losses.emplace_back(iter, loss);
    } else if (full && iter > 0) {
      guard(iter, bg.loss);
    }
    update_temp(temp, cfg.momentum, bg.grad);
    apply_step(theta, cfg.learning_rate, temp);
  }

  linalg::Vec f = kernels::batch_forward(basis, theta, data);
  const double loss_final = relative_mse(f, y);
  traj.params_final = theta;
  guard(cfg.iterations, loss_final);
  traj.losses.emplace_back(cfg.iterations, loss_final);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num = std::max(num, std::fabs(y[i] - f[i]));
    den = std::max(den, std::fabs(y[i]));
  }
  traj.ruae_final = num / (den + 1e-6);
  return traj;
}

Trajectory sgdm(const spectral::SpectralBasis& basis, const std::vector<linalg::Vec>& xs,
                const linalg::Vec& y, const NetShape& shape, const TrainConfig& cfg) {
  validate(cfg);
  if (shape.n != basis.n) throw InvalidInput("network shape does not match graph order");
  return sgdm_from(basis, xs, y, init_params(shape, cfg), cfg);
}

GradCheck grad_check(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                     const std::vector<linalg::Vec>& xs, const linalg::Vec& y, double step) {
  if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  model::check_params(basis, params);
  if (params.mode != model::ConvMode::poly_filter)
    throw InvalidInput("gradient checking requires poly_filter mode");
  if (y.size() != xs.size()) throw InvalidInput("target length does not match batch");

  const kernels::BatchData data = kernels::make_batch(basis, xs, params.mode, params.degree);
  const kernels::BatchGrad bg = kernels::batch_grad_serial(basis, params, data, y);

  NetworkParams smooth = params;
  smooth.activation = model::Activation::smoothed;
  auto loss_of = [&](const NetworkParams& th) {
    return relative_mse(kernels::batch_forward_serial(basis, th, data), y);
  };

  const int n = data.n;
  const int lb = params.degree + 1;
  const double eps = params.eps;
  GradCheck out;

  // Preactivation scan: which neurons sit near an activation kink.
  std::vector<char> near_kink(params.m(), 0);
  for (int m = 0; m < params.m(); ++m) {
    const Neuron& nu = params.neurons[m];
    for (int i = 0; i < data.s; ++i) {
      for (int v = 0; v < n; ++v) {
        double pre = nu.c[v];
        for (int l = 0; l < lb; ++l) pre += nu.b[l] * data.power(i, l)[v];
        if (std::fabs(std::fabs(pre) - eps) <= 10.0 * eps) near_kink[m] = 1;
        if (params.activation == model::Activation::relu && std::fabs(pre) < eps)
          out.relu_mismatch = true;
      }
    }
  }

  auto compare = [&](double* coord, double analytic) {
    const double saved = *coord;
    *coord = saved + step;
    const double lp = loss_of(smooth);
    *coord = saved - step;
    const double lm = loss_of(smooth);
    *coord = saved;
    const double ghat = (lp - lm) / (2.0 * step);
    const double mag = std::max(std::fabs(analytic), std::fabs(ghat));
    const double rel = mag <= 1e-8 ? 0.0 : std::fabs(analytic - ghat) / mag;
    out.max_rel_err = std::max(out.max_rel_err, rel);
    ++out.evaluated;
  };

  for (int m = 0; m < params.m(); ++m) {
    Neuron& nu = smooth.neurons[m];
    const Neuron& g = bg.grad.neurons[m];
    for (int v = 0; v < n; ++v) compare(&nu.a[v], g.a[v]);
    if (near_kink[m]) {
      out.excluded += n + lb;
      continue;
    }
    for (int l = 0; l < lb; ++l) compare(&nu.b[l], g.b[l]);
    for (int v = 0; v < n; ++v) compare(&nu.c[v], g.c[v]);
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "iteration,rmse\n";
  for (const auto& [iter, loss] : traj.losses) {
    out += std::to_string(iter);
    out += ',';
    out += fmt::format_double(loss);
    out += '\n';
  }
  return out;
}

std::string summary_json(const Trajectory& traj, const TrainConfig& cfg, const NetShape& shape) {
  nlohmann::json j;
  j["shape"] = {{"m", shape.m}, {"degree", shape.degree}, {"n", shape.n}};
  j["config"] = {{"momentum", cfg.momentum},
                 {"learning_rate", cfg.learning_rate},
                 {"iterations", cfg.iterations},
                 {"init", cfg.init == InitKind::uniform ? "uniform" : "paper_zero"},
                 {"init_scale", cfg.init_scale},
                 {"seed", cfg.seed},
                 {"eps", cfg.eps},
                 {"record_every", cfg.record_every},
                 {"batch_size", cfg.batch_size},
                 {"deterministic", cfg.deterministic}};
  j["final_rmse"] = traj.losses.back().second;
  j["ruae_final"] = traj.ruae_final;
  j["recorded"] = traj.losses.size();
  return j.dump(2);
}

}  // namespace gclab::train
