#include "gclab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "gclab/error.hpp"
#include "gclab/rng.hpp"
#include "json.hpp"

namespace gclab::spectral {

namespace {

void validate_family(const std::vector<linalg::Mat>& shifts) {
  if (shifts.empty()) throw InvalidInput("joint_eigs: empty shift family");
  const std::size_t n = shifts[0].rows();
  for (const auto& s : shifts) {
    if (s.rows() != n || s.cols() != n)
      throw InvalidInput("joint_eigs: shifts must be square and share the order");
    if (!linalg::is_symmetric(s, 1e-12 * (1.0 + linalg::max_abs(s))))
      throw InvalidInput("joint_eigs: shifts must be symmetric");
  }
}

}  // namespace

CommutationReport check_commuting(const std::vector<linalg::Mat>& shifts, double tol) {
  validate_family(shifts);
  CommutationReport rep;
  for (std::size_t a = 0; a < shifts.size(); ++a) {
    for (std::size_t b = a + 1; b < shifts.size(); ++b) {
      const linalg::Mat ab = linalg::matmul(shifts[a], shifts[b]);
      const linalg::Mat ba = linalg::matmul(shifts[b], shifts[a]);
      double dev = 0.0;
      for (std::size_t t = 0; t < ab.storage().size(); ++t)
        dev = std::max(dev, std::fabs(ab.storage()[t] - ba.storage()[t]));
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_k1 = static_cast<int>(a);
        rep.worst_k2 = static_cast<int>(b);
      }
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

double SpectralBasis::l1_frequency(int n_idx) const {
  double s = 0.0;
  for (int kk = 0; kk < k; ++kk) s += std::fabs(spectrum(n_idx, kk));
  return s;
}

SpectralBasis joint_eigs(const std::vector<linalg::Mat>& shifts, std::uint64_t seed) {
  validate_family(shifts);
  const int n = static_cast<int>(shifts[0].rows());
  const int k = static_cast<int>(shifts.size());

  double max_entry = 0.0;
  for (const auto& s : shifts) max_entry = std::max(max_entry, linalg::max_abs(s));
  if (k > 1) {
    const double ctol = 1e-8 * (1.0 + max_entry * max_entry);
    const CommutationReport rep = check_commuting(shifts, ctol);
    if (!rep.pass)
      throw InvalidInput("joint_eigs: shifts " + std::to_string(rep.worst_k1 + 1) + " and " +
                         std::to_string(rep.worst_k2 + 1) + " do not commute (deviation " +
                         std::to_string(rep.max_deviation) + ")");
  }

  linalg::Mat u;
  if (k == 1) {
    u = linalg::jacobi_eigh(shifts[0]).vectors;
  } else {
    Rng rng(seed);
    bool found = false;
    for (int attempt = 0; attempt < 16 && !found; ++attempt) {
      linalg::Mat combo(n, n, 0.0);
      for (int kk = 0; kk < k; ++kk) {
        const double c = rng.uniform(-1.0, 1.0);
        for (std::size_t t = 0; t < combo.storage().size(); ++t)
          combo.data()[t] += c * shifts[kk].data()[t];
      }
      linalg::SymEig eig = linalg::jacobi_eigh(combo);
      linalg::Vec vals = eig.values;
      std::sort(vals.begin(), vals.end());
      double min_gap = std::numeric_limits<double>::infinity();
      double max_val = 0.0;
      for (int i = 0; i < n; ++i) max_val = std::max(max_val, std::fabs(vals[i]));
      for (int i = 0; i + 1 < n; ++i) min_gap = std::min(min_gap, vals[i + 1] - vals[i]);
      if (n == 1 || min_gap > 1e-8 * (1.0 + max_val)) {
        u = std::move(eig.vectors);
        found = true;
      }
    }
    if (!found)
      throw NumericalError(
          "joint_eigs: no random combination with simple spectrum in 16 draws; "
          "joint diagonalization failed");
  }

  // Read off per-shift eigenvalues and verify diagonality.
  linalg::Mat spectrum(n, k, 0.0);
  for (int kk = 0; kk < k; ++kk) {
    const linalg::Mat su = linalg::matmul(shifts[kk], u);
    const linalg::Mat d = linalg::matmul(linalg::transpose(u), su);
    const double limit = 1e-8 * (1.0 + linalg::max_abs(shifts[kk]));
    const double off = linalg::max_abs_offdiag(d);
    if (off > limit)
      throw NumericalError("joint_eigs: shift " + std::to_string(kk + 1) +
                           " not diagonalized (off-diagonal " + std::to_string(off) + ")");
    for (int i = 0; i < n; ++i) spectrum(i, kk) = d(i, i);
  }

  // Order columns by nondecreasing l1 frequency, ties lexicographic.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto l1_of = [&](int i) {
    double s = 0.0;
    for (int kk = 0; kk < k; ++kk) s += std::fabs(spectrum(i, kk));
    return s;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double la = l1_of(a), lb = l1_of(b);
    if (la != lb) return la < lb;
    for (int kk = 0; kk < k; ++kk)
      if (spectrum(a, kk) != spectrum(b, kk)) return spectrum(a, kk) < spectrum(b, kk);
    return false;
  });

  SpectralBasis basis;
  basis.n = n;
  basis.k = k;
  basis.u = linalg::Mat(n, n, 0.0);
  basis.spectrum = linalg::Mat(n, k, 0.0);
  for (int col = 0; col < n; ++col) {
    const int src = idx[col];
    // sign: first largest-magnitude entry made positive
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double m = std::fabs(u(i, src));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    const double sgn = u(arg, src) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) basis.u(i, col) = sgn * u(i, src);
    for (int kk = 0; kk < k; ++kk) basis.spectrum(col, kk) = spectrum(src, kk);
  }

  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      double d = 0.0;
      for (int kk = 0; kk < k; ++kk)
        d += std::fabs(basis.spectrum(a, kk) - basis.spectrum(b, kk));
      gap = std::min(gap, d);
    }
  }
  basis.distinctness_gap = (n > 1) ? gap : std::numeric_limits<double>::infinity();
  basis.assumption1_ok = basis.distinctness_gap >= 1e-10;

  basis.shift_norms.resize(k, 0.0);
  for (int kk = 0; kk < k; ++kk) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(basis.spectrum(i, kk)));
    basis.shift_norms[kk] = m;
  }
  return basis;
}

linalg::Vec gft(const SpectralBasis& basis, const linalg::Vec& x) {
  if (static_cast<int>(x.size()) != basis.n) throw InvalidInput("gft: dimension mismatch");
  return linalg::matvec_transposed(basis.u, x);
}

linalg::Vec igft(const SpectralBasis& basis, const linalg::Vec& xh) {
  if (static_cast<int>(xh.size()) != basis.n) throw InvalidInput("igft: dimension mismatch");
  return linalg::matvec(basis.u, xh);
}

std::string to_json(const SpectralBasis& basis) {
  nlohmann::json out;
  out["n"] = basis.n;
  out["k"] = basis.k;
  out["u_row_major"] = basis.u.storage();
  out["spectrum_row_major"] = basis.spectrum.storage();
  out["distinctness_gap"] = basis.distinctness_gap;
  out["assumption1_ok"] = basis.assumption1_ok;
  out["shift_norms"] = basis.shift_norms;
  return out.dump();
}

SpectralBasis basis_from_json(const std::string& text) {
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("basis_from_json: parse failure: ") + e.what());
  }
  SpectralBasis basis;
  basis.n = in.at("n").get<int>();
  basis.k = in.at("k").get<int>();
  const auto u = in.at("u_row_major").get<std::vector<double>>();
  const auto sp = in.at("spectrum_row_major").get<std::vector<double>>();
  if (static_cast<int>(u.size()) != basis.n * basis.n ||
      static_cast<int>(sp.size()) != basis.n * basis.k)
    throw InvalidInput("basis_from_json: inconsistent dimensions");
  basis.u = linalg::Mat(basis.n, basis.n);
  std::copy(u.begin(), u.end(), basis.u.data());
  basis.spectrum = linalg::Mat(basis.n, basis.k);
  std::copy(sp.begin(), sp.end(), basis.spectrum.data());
  basis.distinctness_gap = in.at("distinctness_gap").get<double>();
  basis.assumption1_ok = in.at("assumption1_ok").get<bool>();
  basis.shift_norms = in.at("shift_norms").get<std::vector<double>>();
  return basis;
}

std::string cache_key(const std::string& graph_json,
                      const std::vector<graph::ShiftKind>& kinds,
                      std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  auto mix = [&](unsigned char byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (char c : graph_json) mix(static_cast<unsigned char>(c));
  for (graph::ShiftKind k : kinds)
    for (char c : graph::shift_kind_name(k)) mix(static_cast<unsigned char>(c));
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((seed >> (8 * i)) & 0xff));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

SpectralBasis basis_of(const graph::Graph& g, graph::ShiftKind kind, std::uint64_t seed) {
  return joint_eigs({graph::shift_matrix(g, kind)}, seed);
}

}  // namespace gclab::spectral
