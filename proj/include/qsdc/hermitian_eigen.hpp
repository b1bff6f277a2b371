#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qsdc {

namespace detail {

// Cyclic Jacobi on a dense real symmetric matrix (row-major, n x n).
// Returns eigenvalues in ascending order. The matrix is overwritten.
inline std::vector<double> jacobi_symmetric(std::vector<double>& a, std::size_t n) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += at(p, p) * at(p, p);
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    }
    if (off <= 1e-34 * std::max(diag, 1e-300) || off < 1e-300) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace detail

// Eigenvalues (ascending) of a d x d Hermitian matrix given row-major.
//
// The matrix A = X + iY is embedded as the real symmetric [[X, -Y], [Y, X]],
// whose spectrum is that of A with every eigenvalue doubled; cyclic Jacobi
// is run on the embedding and every second eigenvalue kept.
inline std::vector<double> hermitian_eigenvalues(std::span<const std::complex<double>> m,
                                                 std::size_t d) {
  if (m.size() != d * d) throw std::logic_error("hermitian_eigenvalues: size mismatch");
  const std::size_t n = 2 * d;
  std::vector<double> a(n * n);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      // Symmetrize so round-off in the input cannot break the real embedding.
      const std::complex<double> v = 0.5 * (m[r * d + c] + std::conj(m[c * d + r]));
      a[r * n + c] = v.real();
      a[(r + d) * n + (c + d)] = v.real();
      a[r * n + (c + d)] = -v.imag();
      a[(r + d) * n + c] = v.imag();
    }
  }
  const auto doubled = detail::jacobi_symmetric(a, n);
  std::vector<double> eig(d);
  for (std::size_t i = 0; i < d; ++i) eig[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
  return eig;
}

}  // namespace qsdc
