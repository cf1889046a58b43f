#include "gclab/bounds.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gclab/error.hpp"
#include "gclab/kernels.hpp"
#include "gclab/rng.hpp"

namespace gclab::bounds {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidInput("eps must lie in (0, 1/2)");
}

std::int64_t ceil_to_int(long double rhs) {
  const long double c = std::ceil(rhs);
  if (c > 9.0e18L) throw InvalidInput("bound overflows a 64-bit integer");
  return static_cast<std::int64_t>(c);
}

}  // namespace

std::int64_t covering_bound_sparse(int n, int s, double eps) {
  if (n < 1 || s < 1 || s > n) throw InvalidInput("need 1 <= s <= n");
  check_eps(eps);
  const long double e = eps;
  const long double rhs =
      2.0L * std::log(2.0L) / (e * e) +
      2.0L * s / (e * e) * std::log(std::exp(1.0L) * n / (s * e));
  return ceil_to_int(rhs);
}

std::int64_t covering_bound_ball(int n, double eps) {
  if (n < 1) throw InvalidInput("dimension must be at least 1");
  check_eps(eps);
  const long double e = eps;
  const long double rhs =
      2.0L * std::log(2.0L) / (e * e) + 2.0L * n / (e * e) * std::log(3.0L / e);
  return ceil_to_int(rhs);
}

std::int64_t min_width(double eps, std::int64_t n_ext) {
  check_eps(eps);
  if (n_ext < 1) throw InvalidInput("covering size must be at least 1");
  const long double e = eps;
  const long double v = 2.0L * std::log(2.0L * static_cast<long double>(n_ext)) / (e * e);
  if (v > 9.0e18L) throw InvalidInput("bound overflows a 64-bit integer");
  return static_cast<std::int64_t>(std::floor(v)) + 1;
}

double rademacher_bound(double q, int s, int n, double d0, double d2) {
  if (!(q >= 0.0)) throw InvalidInput("norm budget must be nonnegative");
  if (s < 1 || n < 1) throw InvalidInput("sample count and dimension must be at least 1");
  if (!(d0 > 0.0 && d2 > 0.0)) throw InvalidInput("domain constants must be positive");
  return 2.0 * q * (d0 * d2 * std::sqrt(2.0 * std::log(2.0 * n)) + std::sqrt(2.0 * std::log(2.0))) /
         std::sqrt(static_cast<double>(s));
}

double generalization_bound(double q, int s, int n, double delta, double d0, double d2) {
  if (!(q >= 0.0)) throw InvalidInput("norm budget must be nonnegative");
  if (s < 1 || n < 1) throw InvalidInput("sample count and dimension must be at least 1");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("delta must lie in (0, 1/2)");
  if (!(d0 > 0.0 && d2 > 0.0)) throw InvalidInput("domain constants must be positive");
  return (4.0 * d0 * d2 * std::sqrt(std::log(2.0 * n)) + 4.0 * std::sqrt(std::log(2.0)) +
          std::sqrt(std::log(1.0 / delta))) *
         std::sqrt(2.0) * q / std::sqrt(static_cast<double>(s));
}

RadEstimate empirical_rademacher(const spectral::SpectralBasis& basis,
                                 const std::vector<model::NetworkParams>& family,
                                 const std::vector<linalg::Vec>& xs, double q,
                                 const model::NormConfig& cfg, int trials, std::uint64_t seed) {
  if (family.empty()) throw InvalidInput("empty network family");
  if (xs.empty()) throw InvalidInput("empty sample set");
  if (trials < 1) throw InvalidInput("need at least one trial");
  const int s = static_cast<int>(xs.size());
  const int j_count = static_cast<int>(family.size());

  for (int j = 0; j < j_count; ++j) {
    const double pn = model::path_norm(basis, family[j], 1.0, cfg);
    if (pn > q * (1.0 + 1e-10) + 1e-12)
      throw InvalidInput("family member " + std::to_string(j) + " has path norm " +
                         std::to_string(pn) + " above the budget " + std::to_string(q));
  }

  // Predictions are fixed across trials; precompute the family x sample table.
  linalg::Mat preds(j_count, s);
  for (int j = 0; j < j_count; ++j) {
    const kernels::BatchData data =
        kernels::make_batch(basis, xs, family[j].mode, family[j].degree);
    const linalg::Vec f = kernels::batch_forward(basis, family[j], data);
    for (int i = 0; i < s; ++i) preds(j, i) = f[i];
  }

  Rng master(seed);
  std::vector<std::uint64_t> trial_seeds(trials);
  for (std::uint64_t& sd : trial_seeds) sd = master.next_u64();

  std::vector<double> sups(trials, 0.0);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < trials; ++t) {
    Rng rng(trial_seeds[t]);
    linalg::Vec xi(s);
    for (double& v : xi) v = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < j_count; ++j) {
      double acc = 0.0;
      for (int i = 0; i < s; ++i) acc += xi[i] * preds(j, i);
      best = std::max(best, acc / s);
    }
    sups[t] = best;
  }

  RadEstimate out;
  out.trials = trials;
  double mean = 0.0;
  for (double v : sups) mean += v;
  mean /= trials;
  out.estimate = mean;
  if (trials > 1) {
    double var = 0.0;
    for (double v : sups) var += (v - mean) * (v - mean);
    var /= (trials - 1);
    out.std_error = std::sqrt(var / trials);
  }
  return out;
}

}  // namespace gclab::bounds
