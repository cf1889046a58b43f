#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gclab/error.hpp"
#include "gclab/graph.hpp"
#include "gclab/kernels.hpp"
#include "gclab/model.hpp"
#include "gclab/rng.hpp"
#include "gclab/spectral.hpp"
#include "gclab/train.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace gclab;
using model::NetworkParams;
using train::NetShape;
using train::TrainConfig;
using train::Trajectory;

namespace {

struct Problem {
  spectral::SpectralBasis basis;
  std::vector<linalg::Vec> xs;
  linalg::Vec y;
};

Problem make_problem(int n, int samples, std::uint64_t seed) {
  Problem pr;
  pr.basis = spectral::basis_of(testutil::random_connected_graph(n, seed),
                                graph::ShiftKind::laplacian);
  Rng rng(seed + 1);
  for (int i = 0; i < samples; ++i) pr.xs.push_back(testutil::random_vec(n, rng));
  pr.y = testutil::random_vec(samples, rng);
  return pr;
}

bool params_equal(const NetworkParams& a, const NetworkParams& b) {
  if (a.neurons.size() != b.neurons.size()) return false;
  for (std::size_t m = 0; m < a.neurons.size(); ++m)
    if (a.neurons[m].a != b.neurons[m].a || a.neurons[m].b != b.neurons[m].b ||
        a.neurons[m].c != b.neurons[m].c)
      return false;
  return true;
}

}  // namespace

TEST_CASE("init_params shapes, determinism and range") {
  TrainConfig cfg;
  cfg.seed = 17;
  cfg.init_scale = 0.25;
  const NetShape shape{3, 2, 5};
  const NetworkParams p = train::init_params(shape, cfg);
  CHECK(p.mode == model::ConvMode::poly_filter);
  CHECK(p.degree == 2);
  CHECK(p.activation == model::Activation::relu);
  REQUIRE(p.neurons.size() == 3);
  for (const model::Neuron& nu : p.neurons) {
    CHECK(nu.a.size() == 5);
    CHECK(nu.b.size() == 3);
    CHECK(nu.c.size() == 5);
    for (double v : nu.a) CHECK(std::fabs(v) <= 0.25);
    for (double v : nu.b) CHECK(std::fabs(v) <= 0.25);
  }
  CHECK(params_equal(p, train::init_params(shape, cfg)));
  TrainConfig other = cfg;
  other.seed = 18;
  CHECK_FALSE(params_equal(p, train::init_params(shape, other)));

  cfg.init = train::InitKind::paper_zero;
  const NetworkParams z = train::init_params(shape, cfg);
  for (const model::Neuron& nu : z.neurons) {
    for (double v : nu.a) CHECK(v == 0.0);
    for (double v : nu.b) CHECK(v == 0.0);
    for (double v : nu.c) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(train::init_params({0, 1, 3}, cfg), InvalidInput);
}

TEST_CASE("config validation") {
  const Problem pr = make_problem(4, 5, 500);
  const NetShape shape{1, 1, 4};
  TrainConfig cfg;
  cfg.iterations = 1;

  TrainConfig bad = cfg;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, shape, bad), InvalidInput);
  bad.momentum = -0.1;
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, shape, bad), InvalidInput);
  bad = cfg;
  bad.learning_rate = -1e-3;
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, shape, bad), InvalidInput);
  bad = cfg;
  bad.iterations = 0;
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, shape, bad), InvalidInput);
  bad = cfg;
  bad.record_every = 0;
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, shape, bad), InvalidInput);
  bad = cfg;
  bad.batch_size = 6;  // exceeds the sample count
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, shape, bad), InvalidInput);

  // Zero learning rate is legal and leaves the parameters in place.
  TrainConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  frozen.seed = 3;
  const Trajectory traj = train::sgdm(pr.basis, pr.xs, pr.y, shape, frozen);
  CHECK(params_equal(traj.params_final, train::init_params(shape, frozen)));

  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, pr.y, NetShape{1, 1, 7}, cfg), InvalidInput);
  CHECK_THROWS_AS(train::sgdm(pr.basis, pr.xs, linalg::Vec(5, 0.0), shape, cfg), InvalidInput);
}

TEST_CASE("the loop reproduces the momentum recursion exactly") {
  // Temp <- grad F(Theta_0); each step Grad <- grad F(Theta);
  // Temp <- mu Temp + Grad; Theta <- Theta - gamma Temp. The startup gradient
  // is deliberately evaluated twice at Theta_0.
  const Problem pr = make_problem(6, 9, 501);
  TrainConfig cfg;
  cfg.iterations = 3;
  cfg.momentum = 0.9;
  cfg.learning_rate = 0.05;
  cfg.seed = 7;
  const NetShape shape{2, 2, 6};

  const Trajectory traj = train::sgdm(pr.basis, pr.xs, pr.y, shape, cfg);

  NetworkParams theta = train::init_params(shape, cfg);
  const kernels::BatchData data =
      kernels::make_batch(pr.basis, pr.xs, theta.mode, theta.degree);
  model::Gradient temp = kernels::batch_grad(pr.basis, theta, data, pr.y, true).grad;
  std::vector<double> losses;
  for (int t = 1; t <= 3; ++t) {
    const kernels::BatchGrad bg = kernels::batch_grad(pr.basis, theta, data, pr.y, true);
    losses.push_back(bg.loss);
    for (std::size_t m = 0; m < temp.neurons.size(); ++m) {
      model::Neuron& tm = temp.neurons[m];
      const model::Neuron& gm = bg.grad.neurons[m];
      for (std::size_t i = 0; i < tm.a.size(); ++i) tm.a[i] = cfg.momentum * tm.a[i] + gm.a[i];
      for (std::size_t i = 0; i < tm.b.size(); ++i) tm.b[i] = cfg.momentum * tm.b[i] + gm.b[i];
      for (std::size_t i = 0; i < tm.c.size(); ++i) tm.c[i] = cfg.momentum * tm.c[i] + gm.c[i];
    }
    for (std::size_t m = 0; m < theta.neurons.size(); ++m) {
      model::Neuron& pm = theta.neurons[m];
      const model::Neuron& tm = temp.neurons[m];
      for (std::size_t i = 0; i < pm.a.size(); ++i)
        pm.a[i] = pm.a[i] - cfg.learning_rate * tm.a[i];
      for (std::size_t i = 0; i < pm.b.size(); ++i)
        pm.b[i] = pm.b[i] - cfg.learning_rate * tm.b[i];
      for (std::size_t i = 0; i < pm.c.size(); ++i)
        pm.c[i] = pm.c[i] - cfg.learning_rate * tm.c[i];
    }
  }

  CHECK(params_equal(traj.params_final, theta));  // bitwise

  // Recorded losses are the gradient-step byproducts: loss at iteration t is
  // F(Theta_t), known one step later, plus a final forward pass.
  REQUIRE(traj.losses.size() == 4);
  for (int t = 0; t < 3; ++t) {
    CHECK(traj.losses[t].first == t);
    CHECK(traj.losses[t].second == losses[t]);
  }
  CHECK(traj.losses[3].first == 3);
  const linalg::Vec f = kernels::batch_forward(pr.basis, theta, data);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pr.y.size(); ++i) {
    const double z = pr.y[i] - f[i];
    num += z * z;
    den += pr.y[i] * pr.y[i];
  }
  CHECK(traj.losses[3].second == num / den);
}

TEST_CASE("zero momentum reduces to plain gradient descent") {
  const Problem pr = make_problem(5, 7, 502);
  TrainConfig cfg;
  cfg.iterations = 4;
  cfg.momentum = 0.0;
  cfg.learning_rate = 0.1;
  cfg.seed = 11;
  const NetShape shape{1, 1, 5};
  const Trajectory traj = train::sgdm(pr.basis, pr.xs, pr.y, shape, cfg);

  NetworkParams theta = train::init_params(shape, cfg);
  const kernels::BatchData data =
      kernels::make_batch(pr.basis, pr.xs, theta.mode, theta.degree);
  for (int t = 0; t < 4; ++t) {
    const kernels::BatchGrad bg = kernels::batch_grad(pr.basis, theta, data, pr.y, true);
    for (std::size_t m = 0; m < theta.neurons.size(); ++m) {
      // mu = 0 makes Temp equal the current gradient: 0 * Temp + Grad.
      model::Neuron& pm = theta.neurons[m];
      const model::Neuron& gm = bg.grad.neurons[m];
      for (std::size_t i = 0; i < pm.a.size(); ++i)
        pm.a[i] = pm.a[i] - cfg.learning_rate * (0.0 * 1.0 + gm.a[i]);
      for (std::size_t i = 0; i < pm.b.size(); ++i)
        pm.b[i] = pm.b[i] - cfg.learning_rate * gm.b[i];
      for (std::size_t i = 0; i < pm.c.size(); ++i)
        pm.c[i] = pm.c[i] - cfg.learning_rate * gm.c[i];
    }
  }
  // Not bitwise: the loop writes mu * t + g even for mu = 0, which rounds the
  // same way (0.0 * t = +-0.0 and +-0.0 + g = g), so equality does hold.
  CHECK(params_equal(traj.params_final, theta));
}

TEST_CASE("zero initialization is a fixed point of the whole loop") {
  const Problem pr = make_problem(6, 10, 503);
  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.init = train::InitKind::paper_zero;
  const NetShape shape{4, 2, 6};
  const Trajectory traj = train::sgdm(pr.basis, pr.xs, pr.y, shape, cfg);

  for (const model::Neuron& nu : traj.params_final.neurons) {
    for (double v : nu.a) {
      CHECK(v == 0.0);
      CHECK_FALSE(std::signbit(v));  // stays bitwise +0.0
    }
    for (double v : nu.b) {
      CHECK(v == 0.0);
      CHECK_FALSE(std::signbit(v));
    }
    for (double v : nu.c) {
      CHECK(v == 0.0);
      CHECK_FALSE(std::signbit(v));
    }
  }
  for (const auto& [iter, loss] : traj.losses) CHECK(loss == 1.0);
  CHECK(traj.losses.size() == 51);
}

TEST_CASE("record stride keeps endpoints") {
  const Problem pr = make_problem(4, 6, 504);
  TrainConfig cfg;
  cfg.iterations = 10;
  cfg.record_every = 3;
  cfg.seed = 2;
  const Trajectory traj = train::sgdm(pr.basis, pr.xs, pr.y, NetShape{1, 1, 4}, cfg);
  std::vector<int> iters;
  for (const auto& [iter, loss] : traj.losses) iters.push_back(iter);
  CHECK(iters == std::vector<int>{0, 3, 6, 9, 10});
}

TEST_CASE("divergence raises with the partial trajectory attached") {
  const Problem pr = make_problem(5, 8, 505);
  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.learning_rate = 1e9;
  cfg.seed = 4;
  cfg.init_scale = 0.5;
  bool caught = false;
  try {
    train::sgdm(pr.basis, pr.xs, pr.y, NetShape{2, 1, 5}, cfg);
  } catch (const train::DivergedError& e) {
    caught = true;
    CHECK_FALSE(e.partial().losses.empty());
    const double last = e.partial().losses.back().second;
    CHECK((!(last <= 1e6) || e.partial().losses.size() <= 2));
  }
  CHECK(caught);
}

TEST_CASE("minibatch runs are reproducible and distinct from full batch") {
  const Problem pr = make_problem(5, 12, 506);
  TrainConfig cfg;
  cfg.iterations = 8;
  cfg.batch_size = 4;
  cfg.seed = 21;
  const NetShape shape{2, 1, 5};
  const Trajectory a = train::sgdm(pr.basis, pr.xs, pr.y, shape, cfg);
  const Trajectory b = train::sgdm(pr.basis, pr.xs, pr.y, shape, cfg);
  CHECK(params_equal(a.params_final, b.params_final));
  for (std::size_t i = 0; i < a.losses.size(); ++i)
    CHECK(a.losses[i].second == b.losses[i].second);

  TrainConfig full = cfg;
  full.batch_size = 0;
  const Trajectory c = train::sgdm(pr.basis, pr.xs, pr.y, shape, full);
  CHECK_FALSE(params_equal(a.params_final, c.params_final));

  // batch_size == s walks the full-batch path.
  TrainConfig same = cfg;
  same.batch_size = 12;
  const Trajectory d = train::sgdm(pr.basis, pr.xs, pr.y, shape, same);
  CHECK(params_equal(c.params_final, d.params_final));
}

TEST_CASE("sgdm_from accepts explicit initial parameters") {
  const Problem pr = make_problem(4, 6, 507);
  TrainConfig cfg;
  cfg.iterations = 2;
  NetworkParams theta0;
  theta0.mode = model::ConvMode::poly_filter;
  theta0.degree = 1;
  Rng rng(508);
  theta0.neurons.resize(2);
  for (model::Neuron& nu : theta0.neurons) {
    nu.a = testutil::random_vec(4, rng, -0.1, 0.1);
    nu.b = testutil::random_vec(2, rng, -0.1, 0.1);
    nu.c = testutil::random_vec(4, rng, -0.1, 0.1);
  }
  const Trajectory traj = train::sgdm_from(pr.basis, pr.xs, pr.y, theta0, cfg);
  CHECK(traj.losses.size() == 3);

  NetworkParams sp = theta0;
  sp.mode = model::ConvMode::spectral_signal;
  CHECK_THROWS_AS(train::sgdm_from(pr.basis, pr.xs, pr.y, sp, cfg), InvalidInput);
}

TEST_CASE("grad_check approves the smoothed analytic gradient") {
  const Problem pr = make_problem(8, 10, 509);
  Rng rng(510);
  NetworkParams p;
  p.mode = model::ConvMode::poly_filter;
  p.degree = 2;
  p.activation = model::Activation::smoothed;
  p.neurons.resize(3);
  for (model::Neuron& nu : p.neurons) {
    nu.a = testutil::random_vec(8, rng);
    nu.b = testutil::random_vec(3, rng);
    nu.c = testutil::random_vec(8, rng);
  }
  const train::GradCheck gc = train::grad_check(pr.basis, p, pr.xs, pr.y);
  CHECK(gc.max_rel_err < 1e-4);
  CHECK_FALSE(gc.relu_mismatch);
  CHECK(gc.evaluated > 0);
}

TEST_CASE("grad_check flags exact-ramp kinks instead of failing") {
  const Problem pr = make_problem(5, 6, 511);
  NetworkParams p;
  p.mode = model::ConvMode::poly_filter;
  p.degree = 1;
  p.activation = model::Activation::relu;
  p.neurons.resize(1);
  // Zero filter and offset put every preactivation exactly on the kink.
  p.neurons[0] = {linalg::Vec(5, 0.3), linalg::Vec(2, 0.0), linalg::Vec(5, 0.0)};
  const train::GradCheck gc = train::grad_check(pr.basis, p, pr.xs, pr.y);
  CHECK(gc.relu_mismatch);
  CHECK(gc.excluded == 5 + 2);       // the neuron's c and b coordinates
  CHECK(gc.evaluated == 5);          // its a coordinates still compared
}

TEST_CASE("grad_check reports exact agreement on zero residuals") {
  const Problem pr = make_problem(6, 7, 512);
  Rng rng(513);
  NetworkParams p;
  p.mode = model::ConvMode::poly_filter;
  p.degree = 1;
  p.activation = model::Activation::smoothed;
  p.neurons.resize(2);
  for (model::Neuron& nu : p.neurons) {
    nu.a = testutil::random_vec(6, rng);
    nu.b = testutil::random_vec(2, rng);
    nu.c = testutil::random_vec(6, rng);
  }
  // Targets manufactured to match the network exactly: the analytic gradient
  // vanishes and the finite differences fall below the agreement floor.
  const kernels::BatchData data = kernels::make_batch(pr.basis, pr.xs, p.mode, p.degree);
  const linalg::Vec y = kernels::batch_forward(pr.basis, p, data);
  const train::GradCheck gc = train::grad_check(pr.basis, p, pr.xs, y);
  CHECK(gc.max_rel_err == 0.0);
}

TEST_CASE("trajectory csv and summary json formats") {
  const Problem pr = make_problem(4, 5, 514);
  TrainConfig cfg;
  cfg.iterations = 2;
  cfg.seed = 9;
  const NetShape shape{1, 1, 4};
  const Trajectory traj = train::sgdm(pr.basis, pr.xs, pr.y, shape, cfg);

  const std::string csv = train::trajectory_csv(traj);
  CHECK(csv.rfind("iteration,rmse\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);

  const nlohmann::json j = nlohmann::json::parse(train::summary_json(traj, cfg, shape));
  CHECK(j.at("final_rmse").get<double>() == traj.losses.back().second);
  CHECK(j.at("ruae_final").get<double>() == traj.ruae_final);
  CHECK(j.at("shape").at("m").get<int>() == 1);
  CHECK(j.at("config").at("iterations").get<int>() == 2);
  CHECK(j.at("recorded").get<int>() == 3);
}
