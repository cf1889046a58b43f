#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/linalg.hpp"

namespace gclab::spectral {

struct CommutationReport {
  double max_deviation = 0.0;  // max-abs entry of S_k S_k' - S_k' S_k over pairs
  int worst_k1 = -1;
  int worst_k2 = -1;
  bool pass = true;
};

CommutationReport check_commuting(const std::vector<linalg::Mat>& shifts, double tol);

// Joint eigenbasis of a commuting family of symmetric shifts.
//
// Columns of u are the shared eigenvectors; spectrum(n, k) is the eigenvalue
// of shift k on column n. Columns are ordered by nondecreasing
// sum_k |lambda_k(n)| with lexicographic tie-break on the spectrum row, and
// each column's largest-magnitude entry (first such index) is made positive.
//
// distinctness_gap = min_{n != m} sum_k |lambda_k(n) - lambda_k(m)|;
// assumption1_ok records gap >= 1e-10. A degenerate joint spectrum is not an
// error here, but interpolation-based operations refuse to run on it.
struct SpectralBasis {
  int n = 0;
  int k = 0;
  linalg::Mat u;         // n x n
  linalg::Mat spectrum;  // n x k
  double distinctness_gap = 0.0;
  bool assumption1_ok = false;
  std::vector<double> shift_norms;  // ||S_k||_2 = max_n |lambda_k(n)|

  double l1_frequency(int n_idx) const;  // sum_k |lambda_k(n_idx)|
};

// For k = 1 this is a Jacobi eigendecomposition. For k > 1 a random linear
// combination sum_k c_k S_k is drawn from `seed` and redrawn (at most 16
// times) until its spectrum is simple; its eigenvectors diagonalize every
// shift, which is verified to off-diagonal tolerance 1e-8 * (1 + max|S_k|).
SpectralBasis joint_eigs(const std::vector<linalg::Mat>& shifts, std::uint64_t seed = 0);

linalg::Vec gft(const SpectralBasis& basis, const linalg::Vec& x);   // U^T x
linalg::Vec igft(const SpectralBasis& basis, const linalg::Vec& xh); // U xh

std::string to_json(const SpectralBasis& basis);
SpectralBasis basis_from_json(const std::string& text);

// Cache key for a basis blob: FNV-1a over the graph serialization, the shift
// kinds, and the seed. Stable across runs.
std::string cache_key(const std::string& graph_json,
                      const std::vector<graph::ShiftKind>& kinds,
                      std::uint64_t seed);

// Convenience: basis of a single graph shift.
SpectralBasis basis_of(const graph::Graph& g, graph::ShiftKind kind,
                       std::uint64_t seed = 0);

}  // namespace gclab::spectral
