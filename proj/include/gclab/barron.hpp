#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gclab/linalg.hpp"
#include "gclab/model.hpp"
#include "gclab/spectral.hpp"

namespace gclab::barron {

// One atom of a discrete measure on the product of the dual-norm unit sphere
// (a) and the unit sphere of filter-plus-offset pairs (b, c). The filter b is
// a convolution signal; all activations here are the exact ramp, whose
// positive homogeneity is what makes the normalization below exact.
struct Atom {
  linalg::Vec a, b, c;
  double weight = 0.0;
};

struct DiscreteBarronMeasure {
  std::vector<Atom> atoms;   // weights sum to 1
  model::NormConfig normcfg;
};

struct NormalizedMeasure {
  DiscreteBarronMeasure measure;
  double scale = 0.0;  // sum_j w_j ||a_j||_* (||b_j||_co + ||c_j||)
};

// Rescales every atom onto the product of unit spheres and reweights by its
// mass w_j ||a_j||_* (||b_j||_co + ||c_j||); scale is the total mass, an
// upper bound for the represented function's Barron norm. Atoms of zero mass
// contribute nothing under the exact ramp and are dropped; the represented
// function is unchanged: scale times the normalized sum equals the raw sum.
NormalizedMeasure normalize_measure(const spectral::SpectralBasis& basis,
                                    const std::vector<Atom>& raw, const model::NormConfig& cfg);

// Membership checks: weights sum to 1 within 1e-12 and every atom lies on the
// product of unit spheres within 1e-10.
void check_measure(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure);

// scale * sum_j w_j a_j^T ramp(b_j * x + c_j).
double eval_barron(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure,
                   double scale, const linalg::Vec& x);

// M neurons drawn i.i.d. from the atom weights by inverse CDF on a seeded
// uniform stream. Each neuron copies its atom with a multiplied by scale, so
// the expectation of the network equals the represented function and
// ||Theta||_{P,inf} equals scale exactly.
model::NetworkParams sample_network(const DiscreteBarronMeasure& measure, double scale, int m,
                                    std::uint64_t seed);

struct ApproxRateRow {
  int m = 0;
  double mean_sq_err = 0.0;  // mean over trials of the empirical MSE
  double bound = 0.0;        // scale^2 / m
};

// For each width in m_list, draws `trials` networks and averages the
// empirical squared error against the represented function over a shared
// evaluation set of s_eval points uniform on [-1,1]^n. Per-network seeds are
// drawn from `seed` up front, so trials are order-independent.
std::vector<ApproxRateRow> approx_rate_experiment(const spectral::SpectralBasis& basis,
                                                  const DiscreteBarronMeasure& measure,
                                                  double scale, const std::vector<int>& m_list,
                                                  int trials, int s_eval, std::uint64_t seed);

std::string approx_table_csv(const std::vector<ApproxRateRow>& rows);

// K(x, x') = sum_j w_j [a_j^T ramp(b_j * x + c_j)][a_j^T ramp(b_j * x' + c_j)].
double rkhs_kernel(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure,
                   const linalg::Vec& x, const linalg::Vec& xp);

// Gram matrix of rkhs_kernel over the columns of X; symmetric and PSD by
// construction. Entries are independent, so the parallel path is bitwise
// identical to the serial one.
linalg::Mat rkhs_gram(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure,
                      const std::vector<linalg::Vec>& xs, bool parallel = true);

// atom_count atoms with entries uniform on [-1,1] and weights uniform on
// [0.1, 1), pushed through normalize_measure.
NormalizedMeasure random_measure(const spectral::SpectralBasis& basis, int atom_count,
                                 const model::NormConfig& cfg, std::uint64_t seed);

std::string to_json(const DiscreteBarronMeasure& measure);
DiscreteBarronMeasure measure_from_json(const std::string& text);

}  // namespace gclab::barron
