#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gclab/linalg.hpp"
#include "gclab/model.hpp"
#include "gclab/spectral.hpp"

namespace gclab::bounds {

struct BoundReport {
  std::string name;
  double bound_value = 0.0;
  double empirical_value = 0.0;
  bool has_empirical = false;
  bool pass = true;  // bound >= empirical minus MC tolerance
};

// Smallest integer M with M >= 2 ln2 / eps^2 + (2 s / eps^2) ln(e n / (s eps)),
// the sample bound for s-sparse targets. eps must lie in the open interval
// (0, 1/2).
std::int64_t covering_bound_sparse(int n, int s, double eps);

// Smallest integer M with M >= 2 ln2 / eps^2 + (2 n / eps^2) ln(3 / eps).
std::int64_t covering_bound_ball(int n, double eps);

// Smallest integer M with 2 n_ext exp(-M eps^2 / 2) < 1, i.e.
// floor(2 ln(2 n_ext) / eps^2) + 1.
std::int64_t min_width(double eps, std::int64_t n_ext);

// 2 Q (D0 D2 sqrt(2 ln(2N)) + sqrt(2 ln 2)) / sqrt(S).
double rademacher_bound(double q, int s, int n, double d0, double d2);

// (4 D0 D2 sqrt(ln(2N)) + 4 sqrt(ln 2) + sqrt(ln(1/delta))) sqrt(2) Q / sqrt(S),
// delta in (0, 1/2).
double generalization_bound(double q, int s, int n, double delta, double d0, double d2);

struct RadEstimate {
  double estimate = 0.0;   // mean over trials of the family maximum
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
  int trials = 0;
};

// Average over trials of max over the family of (1/S) sum_i xi_i f(x_i) with
// xi_i i.i.d. uniform signs. Every family member's path norm ||Theta||_{P,1}
// must stay within the budget q (checked up to rounding slack). The finite
// family underestimates the supremum the closed-form bound controls, so the
// estimate should not exceed the bound beyond MC noise.
RadEstimate empirical_rademacher(const spectral::SpectralBasis& basis,
                                 const std::vector<model::NetworkParams>& family,
                                 const std::vector<linalg::Vec>& xs, double q,
                                 const model::NormConfig& cfg, int trials, std::uint64_t seed);

}  // namespace gclab::bounds
