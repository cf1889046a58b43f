#pragma once

#include <cstddef>
#include <vector>

namespace gclab::linalg {

using Vec = std::vector<double>;

// Dense row-major matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  const std::vector<double>& storage() const { return a_; }

  bool operator==(const Mat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Vec matvec(const Mat& a, const Vec& x);             // A x
Vec matvec_transposed(const Mat& a, const Vec& x);  // A^T x
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

double dot(const Vec& a, const Vec& b);
double norm1(const Vec& v);
double norm2(const Vec& v);
double norm_inf(const Vec& v);
// p in {1, 2, inf}; pass std::numeric_limits<double>::infinity() for inf.
double vec_norm(const Vec& v, double p);

double max_abs(const Mat& a);
double fro_norm(const Mat& a);
double induced_norm_1(const Mat& a);    // max column abs sum
double induced_norm_inf(const Mat& a);  // max row abs sum
double max_abs_offdiag(const Mat& a);
bool is_symmetric(const Mat& a, double tol);

// Symmetric eigendecomposition by cyclic Jacobi rotations. Columns of
// `vectors` are eigenvectors in the order of `values` (unsorted). Converges
// when the off-diagonal Frobenius mass falls below tol * ||A||_F.
struct SymEig {
  Vec values;
  Mat vectors;
};
SymEig jacobi_eigh(const Mat& a, double tol = 1e-12, int max_sweeps = 64);

// Singular values by one-sided Jacobi (descending). Accurate for small
// singular values, unlike forming A^T A.
Vec singular_values(const Mat& a);

// min ||A x - b||_2 via column-pivoted Householder QR. Columns whose pivot
// norm falls below rank_tol * (largest pivot) get coefficient zero.
Vec solve_least_squares(const Mat& a, const Vec& b, double rank_tol = 1e-13);

}  // namespace gclab::linalg
