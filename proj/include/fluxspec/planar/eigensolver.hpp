#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "fluxspec/errors.hpp"
#include "fluxspec/planar/assembly.hpp"

namespace fluxspec {

inline constexpr std::uint64_t kStartVectorSeed = 0x5EED;

struct EigenSolveOptions {
  double tol = 1e-10;  ///< normwise backward error of the lowest Ritz pair
  int max_iter = 500;
  int block_size = 6;
  /// Shift used when no Dirichlet condition pins the spectrum away from 0.
  double neumann_shift = -1e-6;
};

struct EigenSolveResult {
  double lambda = 0.0;
  Eigen::VectorXcd eigenvector;  ///< on the free dofs, M-normalized
  double residual = 0.0;
  int iterations = 0;
  double estimated_error = std::numeric_limits<double>::quiet_NaN();
  std::optional<PolarMesh> mesh;
  DofMap dofs;
};

namespace detail {

inline double row_sum_norm(const ComplexSparse& A) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(A, k); it; ++it) s[it.row()] += std::abs(it.value());
  return s.size() ? s.maxCoeff() : 0.0;
}

inline double row_sum_norm(const RealSparse& A) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (RealSparse::InnerIterator it(A, k); it; ++it) s[it.row()] += std::fabs(it.value());
  return s.size() ? s.maxCoeff() : 0.0;
}

/// Deterministic start block: all-ones first, then seeded pseudorandom columns.
inline Eigen::MatrixXcd start_block(Eigen::Index n, int b) {
  Eigen::MatrixXcd X(n, b);
  X.col(0).setOnes();
  std::mt19937_64 gen(kStartVectorSeed);
  const auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int c = 1; c < b; ++c)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = unit();
      const double im = unit();
      X(i, c) = Complex(re, im);
    }
  return X;
}

/// M-orthonormalizes the columns in place (two passes of modified Gram-Schmidt).
/// Columns that collapse are replaced from `refill` and retried.
inline void m_orthonormalize(Eigen::MatrixXcd& Y, const RealSparse& M, const Eigen::MatrixXcd& refill) {
  const Eigen::Index b = Y.cols();
  for (Eigen::Index c = 0; c < b; ++c) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      const double before = std::sqrt(std::abs(Y.col(c).dot(M * Y.col(c))));
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index p = 0; p < c; ++p) {
          const Complex proj = Y.col(p).dot(M * Y.col(c));
          Y.col(c) -= proj * Y.col(p);
        }
      const double nrm = std::sqrt(std::abs(Y.col(c).dot(M * Y.col(c))));
      if (nrm > 1e-10 * before && nrm > 0.0) {
        Y.col(c) /= nrm;
        break;
      }
      Y.col(c) = refill.col(c % refill.cols());
    }
  }
}

}  // namespace detail

/// Smallest generalized eigenpair of (K, M) by block shift-invert iteration
/// with Rayleigh-Ritz. The block absorbs (near-)degenerate ground states.
inline EigenSolveResult smallest_eigenpair(const HermitianFormPair& forms, const EigenSolveOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("smallest_eigenpair: tol must be positive");
  check_integrity(forms);
  const ComplexSparse& K = forms.stiffness;
  const RealSparse& M = forms.mass;
  const Eigen::Index n = K.rows();
  const int b = static_cast<int>(std::min<Eigen::Index>(opt.block_size, n));
  const double shift = forms.dirichlet ? 0.0 : opt.neumann_shift;

  const ComplexSparse Mc = M.cast<Complex>();
  const ComplexSparse A = K - Complex(shift) * Mc;
  Eigen::SimplicialLDLT<ComplexSparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw AssemblyIntegrityError("shifted form is not factorizable");

  const double k_norm = detail::row_sum_norm(K);
  const double m_norm = detail::row_sum_norm(M);

  const Eigen::MatrixXcd refill = detail::start_block(n, b);
  Eigen::MatrixXcd X = refill;
  detail::m_orthonormalize(X, M, refill);

  std::vector<double> history;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Eigen::MatrixXcd Y = ldlt.solve(Mc * X);
    detail::m_orthonormalize(Y, M, refill);
    const Eigen::MatrixXcd KY = K * Y;
    Eigen::MatrixXcd H = Y.adjoint() * KY;
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(H);
    X = Y * ritz.eigenvectors();

    const double lambda = ritz.eigenvalues()[0];
    const Eigen::VectorXcd u = X.col(0);
    const Eigen::VectorXcd r = KY * ritz.eigenvectors().col(0) - lambda * (Mc * u);
    const double backward = r.norm() / ((k_norm + std::fabs(lambda) * m_norm) * u.norm());
    history.push_back(backward);
    if (backward <= opt.tol) {
      EigenSolveResult res;
      res.lambda = lambda;
      res.eigenvector = u;
      res.residual = backward;
      res.iterations = it;
      res.dofs = forms.dofs;
      return res;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "block inverse iteration did not converge in %d steps (last residual %.3e)",
                opt.max_iter, history.back());
  throw ConvergenceError(buf, std::move(history));
}

}  // namespace fluxspec
