#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gclab/error.hpp"
#include "gclab/kernels.hpp"
#include "gclab/model.hpp"
#include "gclab/spectral.hpp"

namespace gclab::train {

// paper_zero starts from the all-zero parameters, which are a stationary
// point of the full-batch gradient (every run stays at zero); uniform draws
// each coordinate from U(-init_scale, init_scale) and is the default.
enum class InitKind { paper_zero, uniform };

struct TrainConfig {
  double momentum = 0.9;
  double learning_rate = 0.003;
  int iterations = 300;
  InitKind init = InitKind::uniform;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  double eps = 1e-5;        // activation smoothing width
  int record_every = 1;     // loss recording stride
  int batch_size = 0;       // 0 = full batch; otherwise per-step subsample size
  bool deterministic = true;  // thread-count independent gradient accumulation
};

// Network shape: m neurons, polynomial filters of degree, graph order n.
struct NetShape {
  int m = 1;
  int degree = 0;
  int n = 0;
};

struct Trajectory {
  model::NetworkParams params_final;
  std::vector<std::pair<int, double>> losses;  // (iteration, relative MSE), increasing
  double ruae_final = 0.0;
};

class DivergedError : public NumericalError {
 public:
  DivergedError(const std::string& what, Trajectory partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

model::NetworkParams init_params(const NetShape& shape, const TrainConfig& cfg);

// Gradient descent with momentum: Temp <- grad F(Theta_0), then per step
// Grad <- grad F(Theta); Temp <- momentum * Temp + Grad; Theta <- Theta -
// learning_rate * Temp. The startup gradient is deliberately evaluated again
// by the first loop step. Full-batch unless cfg.batch_size > 0, in which case
// each step draws that many distinct samples and recorded losses are computed
// on the full batch. Losses above 1e6 abort with DivergedError carrying the
// partial trajectory.
Trajectory sgdm(const spectral::SpectralBasis& basis, const std::vector<linalg::Vec>& xs,
                const linalg::Vec& y, const NetShape& shape, const TrainConfig& cfg);

// Same loop from explicitly given initial parameters (poly_filter mode).
Trajectory sgdm_from(const spectral::SpectralBasis& basis, const std::vector<linalg::Vec>& xs,
                     const linalg::Vec& y, const model::NetworkParams& theta0,
                     const TrainConfig& cfg);

struct GradCheck {
  double max_rel_err = 0.0;  // over compared coordinates
  int evaluated = 0;
  int excluded = 0;  // b/c coordinates skipped near smoothing boundaries
  // Exact-ReLU forward with a preactivation inside the smoothing window: the
  // analytic residuals then differ from the smoothed loss the differences
  // probe, so errors are informational rather than a formula defect.
  bool relu_mismatch = false;
};

// Central differences of the smoothed relative MSE against the analytic
// gradient, componentwise relative error |g - ghat| / max(|g|, |ghat|)
// (treated as exact agreement when both magnitudes are <= 1e-8). b and c
// coordinates of a neuron are excluded when one of its preactivations lies
// within 10 eps of an activation kink, where the central difference crosses
// a curvature jump; a coordinates enter the loss quadratically and are always
// compared.
GradCheck grad_check(const spectral::SpectralBasis& basis, const model::NetworkParams& params,
                     const std::vector<linalg::Vec>& xs, const linalg::Vec& y, double step = 1e-6);

std::string trajectory_csv(const Trajectory& traj);
std::string summary_json(const Trajectory& traj, const TrainConfig& cfg, const NetShape& shape);

}  // namespace gclab::train
