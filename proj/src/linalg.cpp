#include "gclab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gclab/error.hpp"

namespace gclab::linalg {

Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols() != x.size()) throw InvalidInput("matvec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const double* row = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vec matvec_transposed(const Mat& a, const Vec& x) {
  if (a.rows() != x.size()) throw InvalidInput("matvec_transposed: dimension mismatch");
  Vec y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    const double* row = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * xi;
  }
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matmul: dimension mismatch");
  Mat c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data() + k * b.cols();
      double* crow = c.data() + i * c.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw InvalidInput("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm1(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm_inf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

double vec_norm(const Vec& v, double p) {
  if (p == 1.0) return norm1(v);
  if (p == 2.0) return norm2(v);
  if (std::isinf(p)) return norm_inf(v);
  throw InvalidInput("vec_norm: p must be 1, 2 or inf");
}

double max_abs(const Mat& a) {
  double s = 0.0;
  for (double x : a.storage()) s = std::max(s, std::fabs(x));
  return s;
}

double fro_norm(const Mat& a) {
  double s = 0.0;
  for (double x : a.storage()) s += x * x;
  return std::sqrt(s);
}

double induced_norm_1(const Mat& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double induced_norm_inf(const Mat& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::fabs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_abs_offdiag(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s = std::max(s, std::fabs(a(i, j)));
  return s;
}

bool is_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

namespace {

double offdiag_mass(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEig jacobi_eigh(const Mat& input, double tol, int max_sweeps) {
  const std::size_t n = input.rows();
  if (n == 0 || input.cols() != n) throw InvalidInput("jacobi_eigh: matrix must be square");
  if (!is_symmetric(input, 1e-12 * (1.0 + max_abs(input))))
    throw InvalidInput("jacobi_eigh: matrix not symmetric");

  Mat a = input;
  Mat v = Mat::identity(n);
  const double total = fro_norm(a);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_mass(a) <= tol * total || n == 1) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip - s * (aiq + tau * aip);
          a(p, i) = a(i, p);
          a(i, q) = aiq + s * (aip - tau * aiq);
          a(q, i) = a(i, q);
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = vip - s * (viq + tau * vip);
          v(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }
  if (n > 1 && offdiag_mass(a) > tol * total && total > 0.0)
    throw NumericalError("jacobi_eigh: did not converge");

  SymEig out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);
  return out;
}

Vec singular_values(const Mat& input) {
  const std::size_t n = input.rows(), m = input.cols();
  if (n == 0 || m == 0) throw InvalidInput("singular_values: empty matrix");
  Mat b = input;
  const double eps = 1e-15;

  for (int sweep = 0; sweep < 64; ++sweep) {
    bool converged = true;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          alpha += bp * bp;
          beta += bq * bq;
          gamma += bp * bq;
        }
        if (std::fabs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
      }
    }
    if (converged) break;
  }

  Vec sv(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += b(i, j) * b(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

Vec solve_least_squares(const Mat& input, const Vec& rhs, double rank_tol) {
  const std::size_t n = input.rows(), m = input.cols();
  if (rhs.size() != n) throw InvalidInput("solve_least_squares: dimension mismatch");
  Mat a = input;
  Vec b = rhs;
  std::vector<std::size_t> perm(m);
  for (std::size_t j = 0; j < m; ++j) perm[j] = j;

  Vec colnorm2(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) colnorm2[j] += a(i, j) * a(i, j);

  const std::size_t steps = std::min(n, m);
  double first_pivot = 0.0;
  std::size_t rank = 0;

  for (std::size_t k = 0; k < steps; ++k) {
    // column pivot: largest remaining column norm (recomputed for accuracy)
    std::size_t best = k;
    double bestn = -1.0;
    for (std::size_t j = k; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += a(i, j) * a(i, j);
      colnorm2[j] = s;
      if (s > bestn) {
        bestn = s;
        best = j;
      }
    }
    if (best != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, best));
      std::swap(colnorm2[k], colnorm2[best]);
      std::swap(perm[k], perm[best]);
    }
    const double pivot = std::sqrt(std::max(colnorm2[k], 0.0));
    if (k == 0) first_pivot = pivot;
    if (pivot <= rank_tol * first_pivot || pivot == 0.0) break;
    rank = k + 1;

    // Householder vector for column k
    double alpha = 0.0;
    for (std::size_t i = k; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (a(k, k) > 0.0) alpha = -alpha;
    Vec h(n, 0.0);
    h[k] = a(k, k) - alpha;
    for (std::size_t i = k + 1; i < n; ++i) h[i] = a(i, k);
    double hnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) hnorm2 += h[i] * h[i];
    if (hnorm2 == 0.0) continue;

    a(k, k) = alpha;
    for (std::size_t i = k + 1; i < n; ++i) a(i, k) = 0.0;
    for (std::size_t j = k + 1; j < m; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < n; ++i) proj += h[i] * a(i, j);
      proj *= 2.0 / hnorm2;
      for (std::size_t i = k; i < n; ++i) a(i, j) -= proj * h[i];
    }
    double projb = 0.0;
    for (std::size_t i = k; i < n; ++i) projb += h[i] * b[i];
    projb *= 2.0 / hnorm2;
    for (std::size_t i = k; i < n; ++i) b[i] -= projb * h[i];
  }

  // back substitution on the leading rank x rank triangle
  Vec z(m, 0.0);
  for (std::size_t kk = rank; kk-- > 0;) {
    double s = b[kk];
    for (std::size_t j = kk + 1; j < rank; ++j) s -= a(kk, j) * z[j];
    const double d = a(kk, kk);
    if (d == 0.0) throw NumericalError("solve_least_squares: zero pivot");
    z[kk] = s / d;
  }
  Vec x(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) x[perm[j]] = z[j];
  return x;
}

}  // namespace gclab::linalg
