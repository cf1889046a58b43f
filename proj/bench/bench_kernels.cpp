// Timing and agreement harness for the batch kernels: the parallel entry
// points must reproduce the serial reference bit for bit when deterministic
// reduction is on.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "gclab/dataio.hpp"
#include "gclab/graph.hpp"
#include "gclab/kernels.hpp"
#include "gclab/model.hpp"
#include "gclab/rng.hpp"
#include "gclab/spectral.hpp"
#include "gclab/train.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace gclab;

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool bitwise_equal(const linalg::Vec& a, const linalg::Vec& b) {
  if (a.size() != b.size()) return false;
  return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(const model::Gradient& a, const model::Gradient& b) {
  if (a.neurons.size() != b.neurons.size()) return false;
  for (std::size_t m = 0; m < a.neurons.size(); ++m)
    if (!bitwise_equal(a.neurons[m].a, b.neurons[m].a) ||
        !bitwise_equal(a.neurons[m].b, b.neurons[m].b) ||
        !bitwise_equal(a.neurons[m].c, b.neurons[m].c))
      return false;
  return true;
}

}  // namespace

int main() {
  const int n = 32, s = 512, m = 8, degree = 5;
  const int reps = 20;

#ifdef _OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: off (serial build)\n");
#endif

  Rng rng(7);
  std::vector<std::vector<double>> coords(n);
  for (auto& c : coords) c = {rng.uniform01(), rng.uniform01()};
  const graph::Graph g = graph::knn_graph(coords, 5);
  const spectral::SpectralBasis basis =
      spectral::basis_of(g, graph::ShiftKind::sym_normalized_laplacian);

  const std::vector<linalg::Vec> xs = dataio::sample_domain(n, s, 11);
  linalg::Vec y(s);
  for (int i = 0; i < s; ++i) y[i] = std::sin(0.3 * i) + 0.1 * xs[i][0];

  train::TrainConfig tc;
  tc.seed = 3;
  model::NetworkParams params = train::init_params({m, degree, n}, tc);

  auto t0 = std::chrono::steady_clock::now();
  const kernels::BatchData data = kernels::make_batch(basis, xs, params.mode, degree);
  std::printf("make_batch          s=%d n=%d L=%d   %8.2f ms\n", s, n, degree, ms_since(t0));

  linalg::Vec f_par, f_ser;
  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f_par = kernels::batch_forward(basis, params, data);
  const double fwd_par = ms_since(t0) / reps;
  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f_ser = kernels::batch_forward_serial(basis, params, data);
  const double fwd_ser = ms_since(t0) / reps;
  std::printf("batch_forward       parallel %8.2f ms   serial %8.2f ms   speedup %.2fx\n",
              fwd_par, fwd_ser, fwd_ser / fwd_par);

  kernels::BatchGrad g_par, g_det, g_ser;
  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) g_det = kernels::batch_grad(basis, params, data, y, true);
  const double grad_det = ms_since(t0) / reps;
  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) g_par = kernels::batch_grad(basis, params, data, y, false);
  const double grad_fast = ms_since(t0) / reps;
  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) g_ser = kernels::batch_grad_serial(basis, params, data, y);
  const double grad_ser = ms_since(t0) / reps;
  std::printf("batch_grad det      parallel %8.2f ms   serial %8.2f ms   speedup %.2fx\n",
              grad_det, grad_ser, grad_ser / grad_det);
  std::printf("batch_grad fast     parallel %8.2f ms   serial %8.2f ms   speedup %.2fx\n",
              grad_fast, grad_ser, grad_ser / grad_fast);

  bool ok = true;
  if (!bitwise_equal(f_par, f_ser)) {
    std::printf("MISMATCH: parallel forward differs from serial\n");
    ok = false;
  }
  if (!bitwise_equal(g_det.grad, g_ser.grad) || g_det.loss != g_ser.loss) {
    std::printf("MISMATCH: deterministic parallel gradient differs from serial\n");
    ok = false;
  }
  const double drift = std::fabs(g_par.loss - g_ser.loss);
  std::printf("fast-reduction loss drift vs serial: %.3e\n", drift);
  if (!(drift < 1e-9)) {
    std::printf("MISMATCH: fast reduction drifted beyond tolerance\n");
    ok = false;
  }
  std::printf(ok ? "agreement: OK\n" : "agreement: FAILED\n");
  return ok ? 0 : 1;
}
