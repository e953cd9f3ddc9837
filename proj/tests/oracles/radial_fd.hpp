#pragma once

// Cell-centered finite differences for the angular modes of a radially
// symmetric magnetic problem on the disk r < R1 with the outer Neumann
// condition:  -(1/r)(r u')' + (beta(r) - m)^2 / r^2 u = lambda u.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Core>

namespace oracle {

/// Lowest eigenvalue of a symmetric tridiagonal matrix by inverse iteration
/// with the shift -1 (the matrices here are positive semidefinite).
inline double smallest_tridiagonal_eigenvalue(const Eigen::VectorXd& d, const Eigen::VectorXd& e) {
  const Eigen::Index n = d.size();
  const double shift = -1.0;
  // LU of (T - shift I) without pivoting; diagonally dominant
  Eigen::VectorXd piv(n);
  piv[0] = d[0] - shift;
  for (Eigen::Index i = 1; i < n; ++i) piv[i] = d[i] - shift - e[i - 1] * e[i - 1] / piv[i - 1];
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n), y(n);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    y[0] = x[0];
    for (Eigen::Index i = 1; i < n; ++i) y[i] = x[i] - e[i - 1] / piv[i - 1] * y[i - 1];
    y[n - 1] /= piv[n - 1];
    for (Eigen::Index i = n - 1; i-- > 0;) y[i] = (y[i] - e[i] * y[i + 1]) / piv[i];
    x = y / y.norm();
    Eigen::VectorXd tx = d.cwiseProduct(x);
    tx.head(n - 1) += e.cwiseProduct(x.tail(n - 1));
    tx.tail(n - 1) += e.cwiseProduct(x.head(n - 1));
    const double next = x.dot(tx);
    if (it > 3 && std::fabs(next - lambda) <= 1e-15 * std::max(1.0, std::fabs(next))) return next;
    lambda = next;
  }
  return lambda;
}

inline double disk_mode_fd(const std::function<double(double)>& beta, long m, double R1, int cells) {
  const double h = R1 / cells;
  Eigen::VectorXd diag(cells), off(cells - 1);
  for (int i = 0; i < cells; ++i) {
    const double r = (i + 0.5) * h;
    const double w = r * h;  // mass weight
    const double a = beta(r) - static_cast<double>(m);
    double d = a * a / (r * r) * w;
    if (i > 0) d += i * h / h;              // face at r = i h
    if (i + 1 < cells) d += (i + 1) * h / h;  // face at r = (i + 1) h; outer face carries no flux
    diag[i] = d / w;
    if (i + 1 < cells) {
      const double rn = (i + 1.5) * h;
      off[i] = -((i + 1) * h / h) / std::sqrt(w * rn * h);
    }
  }
  return smallest_tridiagonal_eigenvalue(diag, off);
}

/// Minimum over modes |m - beta_outer| <= window.
inline double disk_ground_fd(const std::function<double(double)>& beta, double R1, int cells, int window = 3) {
  const long centre = std::lround(beta(R1));
  double best = std::numeric_limits<double>::infinity();
  for (long m = centre - window; m <= centre + window; ++m) best = std::min(best, disk_mode_fd(beta, m, R1, cells));
  return best;
}

}  // namespace oracle
