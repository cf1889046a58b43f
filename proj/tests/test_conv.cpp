#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gclab/conv.hpp"
#include "gclab/error.hpp"
#include "gclab/graph.hpp"
#include "gclab/linalg.hpp"
#include "gclab/rng.hpp"
#include "gclab/spectral.hpp"
#include "test_util.hpp"

using namespace gclab;

namespace {

spectral::SpectralBasis path3_basis() {
  return spectral::basis_of(testutil::path_graph(3), graph::ShiftKind::laplacian);
}

double ramp(double t) { return t > 0.0 ? t : 0.0; }

}  // namespace

TEST_CASE("FilterPoly coefficient round trip and evaluation") {
  const conv::FilterPoly h = conv::FilterPoly::from_coeffs({1.0, 2.0, 3.0});
  CHECK(h.num_vars == 1);
  CHECK(h.degree == 2);
  CHECK(h.eval({2.0}) == 17.0);  // 1 + 2*2 + 3*4
  CHECK(h.eval({0.0}) == 1.0);
  CHECK(h.coeffs() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(h.eval({1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(conv::FilterPoly::from_coeffs({}), InvalidInput);
}

TEST_CASE("the identity filter convolves to the signal itself") {
  const spectral::SpectralBasis basis = path3_basis();
  const linalg::Vec b = conv::signal_from_filter(basis, conv::FilterPoly::from_coeffs({1.0}));
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const linalg::Vec x = testutil::random_vec(3, rng);
    CHECK(testutil::max_abs_diff(conv::convolve(basis, b, x), x) < 1e-12);
  }
}

TEST_CASE("the linear filter convolves to the shift applied to the signal") {
  // With h(lambda) = lambda, b * x = U diag(lambda) U^T x = S x, which the
  // shift matrix evaluates without any spectral machinery.
  const graph::Graph g = testutil::random_connected_graph(9, 42);
  const linalg::Mat s = graph::shift_matrix(g, graph::ShiftKind::laplacian);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::laplacian);
  const linalg::Vec b =
      conv::signal_from_filter(basis, conv::FilterPoly::from_coeffs({0.0, 1.0}));
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const linalg::Vec x = testutil::random_vec(9, rng);
    CHECK(testutil::max_abs_diff(conv::convolve(basis, b, x), linalg::matvec(s, x)) < 1e-9);
  }
}

TEST_CASE("cached and uncached convolution agree") {
  const graph::Graph g = testutil::random_connected_graph(8, 77);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::adjacency);
  Rng rng(5);
  const linalg::Vec b = testutil::random_vec(8, rng);
  const conv::ConvKernel kernel = conv::make_kernel(basis, b);
  CHECK(testutil::max_abs_diff(kernel.beta, spectral::gft(basis, b)) == 0.0);
  for (int rep = 0; rep < 10; ++rep) {
    const linalg::Vec x = testutil::random_vec(8, rng);
    CHECK(testutil::max_abs_diff(conv::convolve(kernel, x), conv::convolve(basis, b, x)) <
          1e-11);
  }
}

TEST_CASE("convolution is commutative") {
  const spectral::SpectralBasis basis = path3_basis();
  Rng rng(6);
  const linalg::Vec b = testutil::random_vec(3, rng);
  const linalg::Vec x = testutil::random_vec(3, rng);
  CHECK(testutil::max_abs_diff(conv::convolve(basis, b, x), conv::convolve(basis, x, b)) <
        1e-12);
}

TEST_CASE("filter_from_signal interpolates the transform exactly") {
  const graph::Graph g = testutil::random_connected_graph(6, 11);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::laplacian);
  REQUIRE(basis.assumption1_ok);
  Rng rng(12);
  const linalg::Vec b = testutil::random_vec(6, rng);
  const linalg::Vec beta = spectral::gft(basis, b);

  const conv::FilterPoly h = conv::filter_from_signal(basis, b, 5);
  for (int i = 0; i < 6; ++i)
    CHECK(h.eval({basis.spectrum(i, 0)}) == doctest::Approx(beta[i]).epsilon(1e-8).scale(1.0));

  const linalg::Vec back = conv::signal_from_filter(basis, h);
  CHECK(testutil::max_abs_diff(back, b) < 1e-8);
}

TEST_CASE("filter_from_signal refuses degenerate spectra") {
  const graph::Graph tri = graph::make_graph(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  const spectral::SpectralBasis basis = spectral::basis_of(tri, graph::ShiftKind::adjacency);
  REQUIRE_FALSE(basis.assumption1_ok);
  CHECK_THROWS_AS(conv::filter_from_signal(basis, {1.0, 0.0, 0.0}, 2), NumericalError);
}

TEST_CASE("wl_basis spans the full filter subspace on a simple spectrum") {
  const spectral::SpectralBasis basis = path3_basis();
  const conv::WlBasis wl = conv::wl_basis(basis, 2);
  REQUIRE(wl.signals.size() == 3);
  CHECK(wl.exponents == std::vector<std::vector<int>>{{0}, {1}, {2}});
  CHECK(wl.rank == 3);
  // Degree 0 keeps only the seed signal.
  CHECK(conv::wl_basis(basis, 0).signals.size() == 1);
}

TEST_CASE("convolution operator norms against hand values") {
  const spectral::SpectralBasis basis = path3_basis();
  // b realizes C = L exactly: beta = (0, 1, 3).
  const linalg::Vec b =
      conv::signal_from_filter(basis, conv::FilterPoly::from_coeffs({0.0, 1.0}));
  CHECK(conv::conv_norm(basis, b, conv::ConvNormKind::coop2) ==
        doctest::Approx(3.0).epsilon(1e-10));
  // Induced 1- and inf-norms of the symmetric L equal its max row abs sum 4.
  CHECK(conv::conv_norm(basis, b, conv::ConvNormKind::coop1) ==
        doctest::Approx(4.0).epsilon(1e-9));
  CHECK(conv::conv_norm(basis, b, conv::ConvNormKind::coop_inf) ==
        doctest::Approx(4.0).epsilon(1e-9));
  CHECK(conv::conv_norm(basis, b, conv::ConvNormKind::coop2, 2.0) ==
        doctest::Approx(6.0).epsilon(1e-10));

  // cofi weights coefficients by shift-norm powers: |1| * 3 for h = lambda,
  // 1 + 2 * 9 for h = 1 + 2 lambda^2.
  CHECK(conv::conv_norm(basis, conv::FilterPoly::from_coeffs({0.0, 1.0}),
                        conv::ConvNormKind::cofi) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(conv::conv_norm(basis, conv::FilterPoly::from_coeffs({1.0, 0.0, 2.0}),
                        conv::ConvNormKind::cofi) == doctest::Approx(19.0).epsilon(1e-12));
}

TEST_CASE("lifted neurons reproduce scalar neurons pointwise") {
  const graph::Graph g = testutil::random_connected_graph(8, 13);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::laplacian);
  // Pick a row of U with no tiny entries; random weighted graphs make the
  // first row generic enough in practice.
  int n0 = -1;
  for (int r = 0; r < 8 && n0 < 0; ++r) {
    bool ok = true;
    for (int c = 0; c < 8; ++c) ok = ok && std::fabs(basis.u(r, c)) >= 1e-6;
    if (ok) n0 = r;
  }
  REQUIRE(n0 >= 0);

  Rng rng(14);
  for (int rep = 0; rep < 5; ++rep) {
    const linalg::Vec v = testutil::random_vec(8, rng);
    const double w = rng.uniform(-1.0, 1.0);
    const conv::LiftedNeuron nu = conv::lift_neuron(basis, v, w, n0);
    for (int t = 0; t < 20; ++t) {
      const linalg::Vec x = testutil::random_vec(8, rng);
      const linalg::Vec bx = conv::convolve(basis, nu.b, x);
      double lhs = 0.0;
      for (int i = 0; i < 8; ++i) lhs += nu.a[i] * ramp(bx[i] + nu.c[i]);
      const double rhs = ramp(linalg::dot(v, x) + w);
      CHECK(std::fabs(lhs - rhs) < 1e-9);
    }
  }
}

TEST_CASE("lift_neuron rejects rows with vanishing transform entries") {
  // In the path basis U(1, 1) = 0, so vertex 1 cannot anchor the lift.
  const spectral::SpectralBasis basis = path3_basis();
  CHECK_THROWS_AS(conv::lift_neuron(basis, {0.1, 0.2, 0.3}, 0.0, 1), NumericalError);
}
