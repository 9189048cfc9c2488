#include "fluidlb/jacobi.h"

#include <algorithm>
#include <cmath>

namespace fluidlb {
namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (int p = 0; p < a.rows(); ++p) {
    for (int q = 0; q < a.cols(); ++q) {
      if (p != q) s += a(p, q) * a(p, q);
    }
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Matrix& m, double off_tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kContract, "eigenvalues of a non-square matrix");
  }
  const int n = m.rows();
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      if (std::fabs(m(p, q) - m(q, p)) > 1e-12 * (1.0 + std::fabs(m(p, q)))) {
        throw Error(ErrorKind::kContract, "eigenvalues of a non-symmetric matrix");
      }
    }
  }

  Matrix a = m;
  for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) >= off_tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p, q) (Golub & Van Loan, 8.5.2).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(n);
  for (int k = 0; k < n; ++k) eig[k] = a(k, k);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace fluidlb
