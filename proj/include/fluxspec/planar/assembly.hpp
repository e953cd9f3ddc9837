#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Sparse>

#include "fluxspec/errors.hpp"
#include "fluxspec/flux.hpp"
#include "fluxspec/planar/mesh.hpp"

namespace fluxspec {

using Complex = std::complex<double>;
using ComplexSparse = Eigen::SparseMatrix<Complex>;
using RealSparse = Eigen::SparseMatrix<double>;

/// Node numbering with the Dirichlet ring (s = 0) removed when present.
struct DofMap {
  int n_s = 0;
  int n_t = 0;
  int first_ring = 0;

  int size() const noexcept { return (n_s + 1 - first_ring) * n_t; }
  int index(int i, int j) const noexcept { return (i - first_ring) * n_t + j; }
  bool eliminated(int i) const noexcept { return i < first_ring; }
};

/// Numerator and denominator of the Rayleigh quotient on one mesh.
struct HermitianFormPair {
  ComplexSparse stiffness;
  RealSparse mass;
  DofMap dofs;
  bool dirichlet = false;
};

struct AssemblyOptions {
  /// Use the raw flux in the potential instead of the canonical one.
  bool bypass_reduction = false;
  int gauss_points = 2;
};

namespace detail {

inline void gauss_rule(int n, std::array<double, 3>& x, std::array<double, 3>& w) {
  if (n == 2) {
    const double d = 0.5 / std::sqrt(3.0);
    x = {0.5 - d, 0.5 + d, 0.0};
    w = {0.5, 0.5, 0.0};
  } else if (n == 3) {
    const double d = 0.5 * std::sqrt(0.6);
    x = {0.5 - d, 0.5, 0.5 + d};
    w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  } else {
    throw InvalidArgument("assembly: gauss_points must be 2 or 3");
  }
}

/// Bilinear assembly of
///   int [ |u_s|^2 / rho^2 + |u_theta - (s rho'/rho) u_s - i beta(r) u|^2 / r^2 ] r rho ds dtheta
/// and int |u|^2 r rho ds dtheta, where rho = R(theta) - r_in.
template <class Beta>
HermitianFormPair assemble_polar(const PolarMesh& mesh, Beta&& beta, bool dirichlet_inner, int gauss_points) {
  const int ns = mesh.n_s(), nt = mesh.n_t();
  DofMap dofs{ns, nt, dirichlet_inner ? 1 : 0};
  const double r_in = mesh.r_in();
  const double dth = mesh.dtheta();

  std::array<double, 3> gx{}, gw{};
  gauss_rule(gauss_points, gx, gw);
  const int nq = gauss_points;

  // boundary radius and its derivative at the angular quadrature points
  std::vector<double> Rq(static_cast<std::size_t>(nt * nq)), dRq(Rq.size());
  for (int j = 0; j < nt; ++j)
    for (int q = 0; q < nq; ++q) {
      const double th = mesh.theta(j) + gx[q] * dth;
      Rq[j * nq + q] = mesh.domain().outer_radius(th);
      dRq[j * nq + q] = mesh.domain().outer_radius_derivative(th);
    }

  std::vector<Eigen::Triplet<Complex>> kt;
  std::vector<Eigen::Triplet<double>> mt;
  kt.reserve(static_cast<std::size_t>(ns) * nt * 16);
  mt.reserve(kt.capacity());

  for (int i = 0; i < ns; ++i) {
    const double s0 = mesh.s(i), ds = mesh.s(i + 1) - s0;
    for (int j = 0; j < nt; ++j) {
      const int jn = (j + 1) % nt;
      const std::array<int, 4> ring{i, i, i + 1, i + 1};
      const std::array<int, 4> col{j, jn, j, jn};
      std::array<std::array<Complex, 4>, 4> ke{};
      std::array<std::array<double, 4>, 4> me{};

      for (int qs = 0; qs < nq; ++qs) {
        const double xi = gx[qs];
        const double s = s0 + xi * ds;
        for (int qt = 0; qt < nq; ++qt) {
          const double eta = gx[qt];
          const double R = Rq[j * nq + qt], dR = dRq[j * nq + qt];
          const double rho = R - r_in;
          const double r = r_in + s * rho;
          if (!(rho > 0.0) || !(r > 0.0)) throw MeshError("assembly: nonpositive mapping Jacobian");
          const double w = gw[qs] * gw[qt] * ds * dth * r * rho;
          const double c = s * dR / rho;
          const double b = beta(r);

          const std::array<double, 4> N{(1 - xi) * (1 - eta), (1 - xi) * eta, xi * (1 - eta), xi * eta};
          const std::array<double, 4> Ns{-(1 - eta) / ds, -eta / ds, (1 - eta) / ds, eta / ds};
          const std::array<double, 4> Nt{-(1 - xi) / dth, (1 - xi) / dth, -xi / dth, xi / dth};
          std::array<Complex, 4> g;
          for (int a = 0; a < 4; ++a) g[a] = Complex(Nt[a] - c * Ns[a], -b * N[a]);

          const double inv_rho2 = 1.0 / (rho * rho), inv_r2 = 1.0 / (r * r);
          for (int a = 0; a < 4; ++a)
            for (int bb = 0; bb < 4; ++bb) {
              ke[bb][a] += w * (Ns[a] * Ns[bb] * inv_rho2 + g[a] * std::conj(g[bb]) * inv_r2);
              me[bb][a] += w * N[a] * N[bb];
            }
        }
      }

      for (int a = 0; a < 4; ++a) {
        if (dofs.eliminated(ring[a])) continue;
        const int ia = dofs.index(ring[a], col[a]);
        for (int bb = 0; bb < 4; ++bb) {
          if (dofs.eliminated(ring[bb])) continue;
          const int ib = dofs.index(ring[bb], col[bb]);
          kt.emplace_back(ib, ia, ke[bb][a]);
          mt.emplace_back(ib, ia, me[bb][a]);
        }
      }
    }
  }

  HermitianFormPair out;
  out.dofs = dofs;
  out.dirichlet = dirichlet_inner;
  out.stiffness.resize(dofs.size(), dofs.size());
  out.mass.resize(dofs.size(), dofs.size());
  out.stiffness.setFromTriplets(kt.begin(), kt.end());
  out.mass.setFromTriplets(mt.begin(), mt.end());
  out.stiffness.makeCompressed();
  out.mass.makeCompressed();
  return out;
}

}  // namespace detail

/// Aharonov-Bohm form in the gauge beta = flux (radial gauge about the hole
/// center). The canonical flux is used unless `bypass_reduction` is set.
inline HermitianFormPair assemble_ab_form(const PolarMesh& mesh, const Flux& phi, const AssemblyOptions& opt = {}) {
  if (mesh.kind() == ProblemKind::LocalizedField)
    throw InvalidArgument("assemble_ab_form: localized field uses assemble_localized_form");
  const double b = opt.bypass_reduction ? phi.raw : phi.reduced;
  return detail::assemble_polar(
      mesh, [b](double) { return b; }, has_dirichlet_core(mesh.kind()), opt.gauss_points);
}

/// Integer gauge shift removed from the localized-field potential: the
/// nearest integer to the flux, ties toward zero.
inline long localized_gauge_shift(double phi) noexcept {
  const double m = std::nearbyint(phi);
  if (std::fabs(phi - m) == 0.5) return static_cast<long>(phi > 0 ? std::floor(phi) : std::ceil(phi));
  return static_cast<long>(m);
}

/// Field 2 pi phi / |omega| on the disk of radius R0 = hole radius, zero
/// outside, in the radial gauge beta(r) = phi min(r^2 / R0^2, 1) minus an
/// integer shift (a singular gauge change that leaves the spectrum unchanged
/// and keeps the outer region free of fast angular phase).
inline HermitianFormPair assemble_localized_form(const PolarMesh& mesh, double phi, const AssemblyOptions& opt = {}) {
  if (mesh.kind() != ProblemKind::LocalizedField)
    throw InvalidArgument("assemble_localized_form: mesh must be built for the localized field");
  if (!std::isfinite(phi)) throw InvalidArgument("assemble_localized_form: flux must be finite");
  const double R0 = mesh.domain().hole_radius();
  const double shift = static_cast<double>(localized_gauge_shift(phi));
  const double inv_R02 = 1.0 / (R0 * R0);
  return detail::assemble_polar(
      mesh,
      [=](double r) { return (r < R0 ? phi * r * r * inv_R02 : phi) - shift; },
      false, opt.gauss_points);
}

/// Largest |K - K^H| entry relative to the largest |K| entry.
inline double hermiticity_defect(const ComplexSparse& K) {
  const ComplexSparse Kh = K.adjoint();
  const ComplexSparse D = K - Kh;
  double dmax = 0.0, kmax = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(D, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (int k = 0; k < K.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(K, k); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  return kmax > 0.0 ? dmax / kmax : dmax;
}

/// Throws AssemblyIntegrityError unless K is Hermitian and M is a symmetric
/// matrix with a positive diagonal.
inline void check_integrity(const HermitianFormPair& f, double herm_tol = 1e-12) {
  const auto n = f.stiffness.rows();
  if (f.stiffness.cols() != n || f.mass.rows() != n || f.mass.cols() != n)
    throw AssemblyIntegrityError("form dimensions disagree");
  if (hermiticity_defect(f.stiffness) > herm_tol) throw AssemblyIntegrityError("stiffness form is not Hermitian");
  const RealSparse Mt = f.mass.transpose();
  const RealSparse D = f.mass - Mt;
  for (int k = 0; k < D.outerSize(); ++k)
    for (RealSparse::InnerIterator it(D, k); it; ++it)
      if (std::fabs(it.value()) > herm_tol * std::fabs(f.mass.coeff(it.row(), it.row())))
        throw AssemblyIntegrityError("mass form is not symmetric");
  const Eigen::VectorXd diag = f.mass.diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    if (!(diag[i] > 0.0)) throw AssemblyIntegrityError("mass form has a nonpositive diagonal entry");
}

}  // namespace fluxspec
