#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "gclab/conv.hpp"
#include "gclab/error.hpp"
#include "gclab/graph.hpp"
#include "gclab/model.hpp"
#include "gclab/rng.hpp"
#include "gclab/spectral.hpp"
#include "test_util.hpp"

using namespace gclab;
using model::Activation;
using model::ConvMode;
using model::NetworkParams;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

spectral::SpectralBasis path3_basis() {
  return spectral::basis_of(testutil::path_graph(3), graph::ShiftKind::laplacian);
}

double ramp(double t) { return t > 0.0 ? t : 0.0; }

NetworkParams random_poly_params(int m, int degree, int n, double eps, Activation act,
                                 Rng& rng) {
  NetworkParams p;
  p.mode = ConvMode::poly_filter;
  p.degree = degree;
  p.eps = eps;
  p.activation = act;
  p.neurons.resize(m);
  for (model::Neuron& nu : p.neurons) {
    nu.a = testutil::random_vec(n, rng);
    nu.b = testutil::random_vec(degree + 1, rng);
    nu.c = testutil::random_vec(n, rng);
  }
  return p;
}

}  // namespace

TEST_CASE("relu_smooth hand values at eps = 0.1") {
  // Quadratic cap (t + eps)^2 / (4 eps) between -eps and eps.
  auto [v0, d0] = model::relu_smooth(0.05, 0.1);
  CHECK(v0 == doctest::Approx(0.05625).epsilon(1e-15));
  CHECK(d0 == doctest::Approx(0.75).epsilon(1e-15));
  auto [v1, d1] = model::relu_smooth(0.0, 0.1);
  CHECK(v1 == doctest::Approx(0.025).epsilon(1e-15));  // eps / 4
  CHECK(d1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(model::relu_smooth(0.1, 0.1).first == 0.1);    // continuous at +eps
  CHECK(model::relu_smooth(0.1, 0.1).second == 1.0);
  CHECK(model::relu_smooth(-0.1, 0.1).first == 0.0);
  CHECK(model::relu_smooth(-0.1, 0.1).second == 0.0);
  CHECK(model::relu_smooth(2.0, 0.1).first == 2.0);
  CHECK(model::relu_smooth(-2.0, 0.1).first == 0.0);
}

TEST_CASE("activate dispatches between the exact ramp and the smoothed one") {
  CHECK(model::activate(-1.0, Activation::relu, 0.1) == 0.0);
  CHECK(model::activate(2.0, Activation::relu, 0.1) == 2.0);
  CHECK(model::activate(0.005, Activation::relu, 0.1) == 0.005);  // exact inside the window
  CHECK(model::activate(0.0, Activation::smoothed, 0.1) == doctest::Approx(0.025).epsilon(1e-15));
}

TEST_CASE("forward matches the hand formula in poly_filter mode") {
  const graph::Graph g = testutil::path_graph(3);
  const linalg::Mat s = graph::shift_matrix(g, graph::ShiftKind::laplacian);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::laplacian);

  NetworkParams p;
  p.mode = ConvMode::poly_filter;
  p.degree = 1;
  p.neurons.resize(2);
  p.neurons[0] = {{1.0, -1.0, 2.0}, {0.2, 0.5}, {0.1, 0.0, -0.3}};
  p.neurons[1] = {{0.5, 0.5, 0.5}, {-0.4, 0.3}, {0.0, 0.2, 0.0}};

  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const linalg::Vec x = testutil::random_vec(3, rng);
    const linalg::Vec sx = linalg::matvec(s, x);
    double want = 0.0;
    for (const model::Neuron& nu : p.neurons)
      for (int v = 0; v < 3; ++v)
        want += nu.a[v] * ramp(nu.b[0] * x[v] + nu.b[1] * sx[v] + nu.c[v]);
    want /= 2.0;
    CHECK(model::forward(basis, p, x) == doctest::Approx(want).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("forward matches the hand formula in spectral_signal mode") {
  const spectral::SpectralBasis basis = path3_basis();
  Rng rng(9);
  NetworkParams p;
  p.mode = ConvMode::spectral_signal;
  p.neurons.resize(1);
  p.neurons[0] = {testutil::random_vec(3, rng), testutil::random_vec(3, rng),
                  testutil::random_vec(3, rng)};
  for (int rep = 0; rep < 10; ++rep) {
    const linalg::Vec x = testutil::random_vec(3, rng);
    const linalg::Vec bx = conv::convolve(basis, p.neurons[0].b, x);
    double want = 0.0;
    for (int v = 0; v < 3; ++v) want += p.neurons[0].a[v] * ramp(bx[v] + p.neurons[0].c[v]);
    CHECK(model::forward(basis, p, x) == doctest::Approx(want).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("path norm over neurons: max, 1-mean and 2-mean") {
  const spectral::SpectralBasis basis = path3_basis();
  model::NormConfig cfg;  // p = inf, dual = 1-norm on a, cofi on poly filters

  NetworkParams p;
  p.mode = ConvMode::poly_filter;
  p.degree = 1;
  p.neurons.resize(2);
  // ||a||_1 = 3, cofi(b) = 0 + 1 * ||S|| = 3, ||c||_inf = 0.5: norm 10.5.
  p.neurons[0] = {{1.0, -2.0, 0.0}, {0.0, 1.0}, {0.5, 0.0, 0.0}};
  p.neurons[1] = {{0.0, 0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0, 0.0}};

  CHECK(model::neuron_path_norm(basis, p, 0, cfg) == doctest::Approx(10.5).epsilon(1e-12));
  CHECK(model::neuron_path_norm(basis, p, 1, cfg) == 0.0);
  CHECK(model::path_norm(basis, p, kInf, cfg) == doctest::Approx(10.5).epsilon(1e-12));
  CHECK(model::path_norm(basis, p, 1.0, cfg) == doctest::Approx(5.25).epsilon(1e-12));
  CHECK(model::path_norm(basis, p, 2.0, cfg) ==
        doctest::Approx(10.5 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(model::path_norm(basis, p, 3.0, cfg), InvalidInput);
}

TEST_CASE("path norm in spectral mode uses the configured convolution norm") {
  const spectral::SpectralBasis basis = path3_basis();
  model::NormConfig cfg;
  NetworkParams p;
  p.mode = ConvMode::spectral_signal;
  p.neurons.resize(1);
  // b realizes C = L, whose induced inf-norm is 4; a = e_0, c = 0.
  p.neurons[0] = {{1.0, 0.0, 0.0},
                  conv::signal_from_filter(basis, conv::FilterPoly::from_coeffs({0.0, 1.0})),
                  {0.0, 0.0, 0.0}};
  CHECK(model::path_norm(basis, p, kInf, cfg) == doctest::Approx(4.0).epsilon(1e-9));

  cfg.conv_kind = conv::ConvNormKind::coop2;  // max |beta| = 3
  CHECK(model::path_norm(basis, p, kInf, cfg) == doctest::Approx(3.0).epsilon(1e-9));

  cfg.p = 2.0;  // dual of 2 is 2: ||a||_2 = 1 unchanged here
  CHECK(model::path_norm(basis, p, kInf, cfg) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("rmse and ruae against direct evaluation") {
  const spectral::SpectralBasis basis = path3_basis();
  Rng rng(10);
  const NetworkParams p = random_poly_params(2, 1, 3, 1e-5, Activation::relu, rng);
  std::vector<linalg::Vec> xs;
  for (int i = 0; i < 6; ++i) xs.push_back(testutil::random_vec(3, rng));
  linalg::Vec y = testutil::random_vec(6, rng);

  double num = 0.0, den = 0.0, sup_z = 0.0, sup_y = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double z = y[i] - model::forward(basis, p, xs[i]);
    num += z * z;
    den += y[i] * y[i];
    sup_z = std::max(sup_z, std::fabs(z));
    sup_y = std::max(sup_y, std::fabs(y[i]));
  }
  CHECK(model::rmse(basis, p, xs, y) == doctest::Approx(num / den).epsilon(1e-12));
  CHECK(model::ruae(basis, p, xs, y) ==
        doctest::Approx(sup_z / (sup_y + 1e-6)).epsilon(1e-12));

  CHECK_THROWS_AS(model::rmse(basis, p, xs, linalg::Vec(6, 0.0)), InvalidInput);
}

TEST_CASE("ruae of the zero network on zero targets is zero, not a division error") {
  const spectral::SpectralBasis basis = path3_basis();
  NetworkParams p;
  p.mode = ConvMode::poly_filter;
  p.degree = 0;
  p.neurons.assign(1, {{0, 0, 0}, {0.0}, {0, 0, 0}});
  const std::vector<linalg::Vec> xs = {{0.1, 0.2, 0.3}};
  CHECK(model::ruae(basis, p, xs, {0.0}) == 0.0);
}

TEST_CASE("analytic gradient agrees with central differences of the smoothed loss") {
  const graph::Graph g = testutil::random_connected_graph(6, 55);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::laplacian);
  Rng rng(56);
  NetworkParams p = random_poly_params(2, 2, 6, 1e-5, Activation::smoothed, rng);
  std::vector<linalg::Vec> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(testutil::random_vec(6, rng));
  const linalg::Vec y = testutil::random_vec(6 + 2, rng);

  const model::Gradient grad = model::grad(basis, p, xs, y);
  const double h = 1e-6;
  double max_rel = 0.0;
  auto probe = [&](double* coord, double analytic) {
    const double saved = *coord;
    *coord = saved + h;
    const double lp = model::rmse(basis, p, xs, y);
    *coord = saved - h;
    const double lm = model::rmse(basis, p, xs, y);
    *coord = saved;
    const double ghat = (lp - lm) / (2.0 * h);
    const double mag = std::max(std::fabs(analytic), std::fabs(ghat));
    if (mag > 1e-8) max_rel = std::max(max_rel, std::fabs(analytic - ghat) / mag);
  };
  for (int m = 0; m < 2; ++m) {
    for (int v = 0; v < 6; ++v) probe(&p.neurons[m].a[v], grad.neurons[m].a[v]);
    for (int l = 0; l < 3; ++l) probe(&p.neurons[m].b[l], grad.neurons[m].b[l]);
    for (int v = 0; v < 6; ++v) probe(&p.neurons[m].c[v], grad.neurons[m].c[v]);
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("check_params rejects inconsistent shapes and modes") {
  const spectral::SpectralBasis basis = path3_basis();
  NetworkParams p;
  p.mode = ConvMode::poly_filter;
  p.degree = 1;
  p.neurons.assign(1, {{0, 0, 0}, {0.0, 0.0}, {0, 0, 0}});
  CHECK_NOTHROW(model::check_params(basis, p));

  NetworkParams bad = p;
  bad.neurons[0].b = {0.0};  // needs degree + 1 coefficients
  CHECK_THROWS_AS(model::check_params(basis, bad), InvalidInput);
  bad = p;
  bad.neurons[0].a = {0.0, 0.0};
  CHECK_THROWS_AS(model::check_params(basis, bad), InvalidInput);
  bad = p;
  bad.neurons.clear();
  CHECK_THROWS_AS(model::check_params(basis, bad), InvalidInput);
  bad = p;
  bad.mode = ConvMode::spectral_signal;  // b no longer matches n
  CHECK_THROWS_AS(model::check_params(basis, bad), InvalidInput);
}

TEST_CASE("json round trip with hex floats is bitwise exact") {
  Rng rng(60);
  NetworkParams p = random_poly_params(2, 2, 4, 1e-5, Activation::smoothed, rng);
  p.mode = ConvMode::poly_filter;
  const NetworkParams back = model::params_from_json(model::to_json(p, true));
  CHECK(back.mode == p.mode);
  CHECK(back.degree == p.degree);
  CHECK(back.eps == p.eps);
  CHECK(back.activation == p.activation);
  REQUIRE(back.neurons.size() == p.neurons.size());
  for (std::size_t m = 0; m < p.neurons.size(); ++m) {
    CHECK(back.neurons[m].a == p.neurons[m].a);
    CHECK(back.neurons[m].b == p.neurons[m].b);
    CHECK(back.neurons[m].c == p.neurons[m].c);
  }

  // Plain decimal serialization also round-trips through shortest-form.
  const NetworkParams back2 = model::params_from_json(model::to_json(p, false));
  for (std::size_t m = 0; m < p.neurons.size(); ++m)
    CHECK(back2.neurons[m].b == p.neurons[m].b);

  CHECK_THROWS_AS(model::params_from_json("[]"), InvalidInput);
}
