#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "fluxspec/errors.hpp"
#include "fluxspec/flux.hpp"
#include "fluxspec/planar/assembly.hpp"
#include "fluxspec/planar/eigensolver.hpp"
#include "fluxspec/planar/mesh.hpp"

namespace fluxspec {

struct PlanarOptions {
  MeshParams mesh;
  AssemblyOptions assembly;
  EigenSolveOptions solver;
  /// Also solve on the half-resolution mesh and report a Richardson error.
  bool estimate_error = true;
};

/// Safety factor applied to the two-grid Richardson estimate (grid
/// convergence index convention for two-grid studies of a known order).
inline constexpr double kRichardsonSafety = 1.25;

inline HermitianFormPair assemble_for(const PolarMesh& mesh, const Flux& phi, const AssemblyOptions& opt) {
  if (mesh.kind() == ProblemKind::LocalizedField) return assemble_localized_form(mesh, phi.raw, opt);
  return assemble_ab_form(mesh, phi, opt);
}

inline EigenSolveResult solve_on_mesh(const PolarMesh& mesh, const Flux& phi, const PlanarOptions& opt) {
  EigenSolveResult res = smallest_eigenpair(assemble_for(mesh, phi, opt.assembly), opt.solver);
  res.mesh = mesh;
  return res;
}

/// Lowest eigenvalue of one of the four planar problems. For the localized
/// field the raw flux is used; the Aharonov-Bohm kinds use the canonical flux
/// unless reduction is bypassed.
inline EigenSolveResult planar_eigenvalue(const StarDomain& dom, const Flux& phi, ProblemKind kind,
                                          const PlanarOptions& opt = {}) {
  const PolarMesh mesh(dom, kind, opt.mesh);
  EigenSolveResult fine = solve_on_mesh(mesh, phi, opt);
  if (opt.estimate_error && mesh.has_coarsening()) {
    const EigenSolveResult coarse = solve_on_mesh(mesh.coarsened(), phi, opt);
    fine.estimated_error = kRichardsonSafety * std::fabs(fine.lambda - coarse.lambda) / 3.0;
  }
  return fine;
}

/// Nodal values of the eigenvector including the eliminated Dirichlet ring.
inline Eigen::VectorXcd full_nodal_values(const EigenSolveResult& res) {
  const DofMap& d = res.dofs;
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d.n_s + 1) * d.n_t);
  for (int i = d.first_ring; i <= d.n_s; ++i)
    for (int j = 0; j < d.n_t; ++j) full[static_cast<Eigen::Index>(i) * d.n_t + j] = res.eigenvector[d.index(i, j)];
  return full;
}

/// Plain CSV with columns s,theta,re_u,im_u, one line per mesh node.
inline void write_eigenvector_csv(std::ostream& os, const EigenSolveResult& res) {
  if (!res.mesh) throw InvalidArgument("write_eigenvector_csv: result carries no mesh");
  const PolarMesh& mesh = *res.mesh;
  const Eigen::VectorXcd full = full_nodal_values(res);
  // rotate the global phase so the largest entry is real and positive
  Eigen::Index imax = 0;
  full.cwiseAbs().maxCoeff(&imax);
  const Complex phase = std::abs(full[imax]) > 0 ? std::conj(full[imax]) / std::abs(full[imax]) : Complex(1.0);
  os << "s,theta,re_u,im_u\n";
  char buf[128];
  for (int i = 0; i <= mesh.n_s(); ++i)
    for (int j = 0; j < mesh.n_t(); ++j) {
      const Complex v = phase * full[static_cast<Eigen::Index>(i) * mesh.n_t() + j];
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g,%.12g\n", mesh.s(i), mesh.theta(j), v.real(), v.imag());
      os << buf;
    }
}

// ---- punctured domains ------------------------------------------------------

struct PuncturedRow {
  double core_radius = 0.0;
  double lambda = 0.0;
  double estimated_error = 0.0;
};

struct PuncturedResult {
  std::vector<PuncturedRow> table;
  bool monotone = true;
  bool extrapolated = false;
  double lambda = std::numeric_limits<double>::quiet_NaN();  ///< limit estimate
  double uncertainty = std::numeric_limits<double>::quiet_NaN();
  double fitted_order = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kPuncturedGrading = 2.0;

/// Fits lambda(eps) = lambda0 + C eps^p through three points and returns
/// {lambda0, p}; nullopt when no exponent in (0.05, 8) matches.
inline std::optional<std::pair<double, double>> fit_power_limit(double e1, double l1, double e2, double l2, double e3,
                                                                double l3) {
  const double d12 = l1 - l2, d23 = l2 - l3;
  if (d23 == 0.0 || (d12 > 0.0) != (d23 > 0.0)) return std::nullopt;
  const double target = d12 / d23;
  const auto ratio = [&](double p) {
    return (std::pow(e1, p) - std::pow(e2, p)) / (std::pow(e2, p) - std::pow(e3, p)) - target;
  };
  double lo = 0.05, hi = 8.0;
  double flo = ratio(lo);
  if ((flo > 0.0) == (ratio(hi) > 0.0)) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = ratio(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double p = 0.5 * (lo + hi);
  const double C = d23 / (std::pow(e2, p) - std::pow(e3, p));
  return std::make_pair(l3 - C * std::pow(e3, p), p);
}

/// Friedrichs eigenvalue on the punctured domain approached through a
/// sequence of shrinking Dirichlet cores. The table is the primary output;
/// the limit is a power-law fit through the last three entries.
inline PuncturedResult punctured_eigenvalue(const StarDomain& dom, const Flux& phi, const std::vector<double>& core_radii,
                                            PlanarOptions opt = {}) {
  if (core_radii.empty()) throw InvalidArgument("punctured_eigenvalue: need at least one core radius");
  const double rmin = dom.outer_radius_range().first;
  for (std::size_t i = 0; i < core_radii.size(); ++i) {
    if (!(core_radii[i] > 0.0) || !(core_radii[i] < 0.25 * rmin))
      throw InvalidArgument("punctured_eigenvalue: core radii must be positive and small against the domain");
    if (i > 0 && !(core_radii[i] < core_radii[i - 1]))
      throw InvalidArgument("punctured_eigenvalue: core radii must be strictly decreasing");
  }

  PuncturedResult out;
  for (double eps : core_radii) {
    const EigenSolveResult r = planar_eigenvalue(dom.with_hole_radius(eps), phi, ProblemKind::PuncturedFriedrichs, opt);
    out.table.push_back({eps, r.lambda, std::isfinite(r.estimated_error) ? r.estimated_error : 0.0});
  }
  for (std::size_t i = 1; i < out.table.size(); ++i) {
    const auto& a = out.table[i - 1];
    const auto& b = out.table[i];
    if (b.lambda > a.lambda + a.estimated_error + b.estimated_error) out.monotone = false;
  }

  const auto& last = out.table.back();
  out.lambda = last.lambda;
  out.uncertainty = out.table.size() > 1 ? std::fabs(out.table[out.table.size() - 2].lambda - last.lambda) : 0.0;
  if (!out.monotone || out.table.size() < 3) return out;

  const auto n = out.table.size();
  const auto& t1 = out.table[n - 3];
  const auto& t2 = out.table[n - 2];
  if (const auto fit = fit_power_limit(t1.core_radius, t1.lambda, t2.core_radius, t2.lambda, last.core_radius,
                                       last.lambda)) {
    out.extrapolated = true;
    out.lambda = fit->first;
    out.fitted_order = fit->second;
    out.uncertainty = std::fabs(fit->first - last.lambda) + last.estimated_error;
  }
  return out;
}

}  // namespace fluxspec
