#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "fluxspec/errors.hpp"
#include "fluxspec/flux.hpp"
#include "fluxspec/geometry.hpp"

namespace fluxspec {

/// Boundary condition on the inner circle r = R0. The outer circle is always
/// (magnetic) Neumann.
enum class InnerBC { Dirichlet, Neumann };

inline const char* to_string(InnerBC bc) noexcept {
  return bc == InnerBC::Dirichlet ? "dirichlet" : "neumann";
}

inline InnerBC inner_bc_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "D") return InnerBC::Dirichlet;
  if (s == "neumann" || s == "N") return InnerBC::Neumann;
  throw InvalidArgument("unknown inner boundary condition: " + s);
}

/// One angular Fourier mode of the annulus problem:
///   -u'' - u'/r + (phi - m)^2 / r^2 u = mu u  on (R0, R1),  u'(R1) = 0.
/// The potential uses `flux.raw`, so a caller can bypass canonical reduction.
struct ModeProblem {
  AnnulusSpec annulus;
  Flux flux;
  long mode = 0;
  InnerBC inner_bc = InnerBC::Dirichlet;

  double nu() const noexcept { return std::fabs(flux.raw - static_cast<double>(mode)); }
};

struct RadialEigenResult {
  ModeProblem problem;
  double mu = 0.0;
  std::vector<double> grid;
  std::vector<double> u;  ///< nodal values, int u^2 r dr = 1, u(R1) > 0
  double estimated_error = 0.0;
  double mu_extrapolated = 0.0;  ///< Richardson combination with the half-resolution solve
  double residual = 0.0;
  int iterations = 0;

  std::size_t n_elements() const noexcept { return grid.empty() ? 0 : grid.size() - 1; }
};

struct MonotonicityReport {
  bool u_positive = false;
  bool u_increasing = false;
  bool N_positive = false;
  bool U_decreasing = false;
  double worst_violation = 0.0;
  double tolerance = 0.0;

  bool all() const noexcept { return u_positive && u_increasing && N_positive && U_decreasing; }
};

/// `tol` bounds the normwise backward error ||K u - mu M u|| / ((||K|| + |mu| ||M||) ||u||).
struct RadialSolveOptions {
  double tol = 1e-13;
  int max_iter = 500;
  double neumann_shift = -1e-8;
};

inline constexpr int kDefaultRadialElements = 2048;
inline constexpr int kDefaultModeWindow = 2;

namespace detail {

/// Symmetric tridiagonal matrix: diag[i], off[i] couples i and i+1.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const noexcept { return diag.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const noexcept {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
  }

  double inf_norm() const noexcept {
    double m = 0.0;
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = std::fabs(diag[i]);
      if (i > 0) s += std::fabs(off[i - 1]);
      if (i + 1 < n) s += std::fabs(off[i]);
      m = std::max(m, s);
    }
    return m;
  }
};

/// LDL^T of a symmetric positive definite tridiagonal matrix.
class TridiagonalLDLT {
public:
  explicit TridiagonalLDLT(const SymTridiagonal& a) : d_(a.size()), l_(a.off.size()) {
    const std::size_t n = a.size();
    d_[0] = a.diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      if (!(d_[i - 1] > 0.0)) throw ConvergenceError("radial factorization lost positive definiteness", {});
      l_[i - 1] = a.off[i - 1] / d_[i - 1];
      d_[i] = a.diag[i] - l_[i - 1] * a.off[i - 1];
    }
    if (!(d_[n - 1] > 0.0)) throw ConvergenceError("radial factorization lost positive definiteness", {});
  }

  void solve_in_place(std::span<double> x) const noexcept {
    const std::size_t n = d_.size();
    for (std::size_t i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i) x[i] /= d_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= l_[i] * x[i + 1];
  }

private:
  std::vector<double> d_;
  std::vector<double> l_;
};

/// Exact integrals of phi_i phi_j / r over [a, a + h] for the hats
/// phi_1 = (b - r)/h, phi_2 = (r - a)/h. The log form cancels badly for
/// thin elements, so small h/a uses the series instead.
struct InverseRMoments {
  double i11, i12, i22;
};

inline InverseRMoments inverse_r_moments(double a, double h) noexcept {
  const double t = h / a;
  if (t < 0.5) {
    // alternating series from expanding 1/(1 + x), x = (r - a)/a
    double i11 = 0.0, i12 = 0.0, i22 = 0.0;
    double tp = t;  // t^(k+1)
    for (int k = 0; k < 200; ++k) {
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      const double k1 = k + 1.0, k2 = k + 2.0, k3 = k + 3.0;
      const double d11 = sgn * 2.0 * tp / (k1 * k2 * k3);
      const double d12 = sgn * tp / (k2 * k3);
      const double d22 = sgn * tp / k3;
      i11 += d11;
      i12 += d12;
      i22 += d22;
      if (std::fabs(d22) < 1e-18 * std::fabs(i22)) break;
      tp *= t;
    }
    return {i11, i12, i22};
  }
  const double L = std::log1p(t);
  const double T = 1.0 + t;
  const double t2 = t * t;
  return {(T * T * L - 2.0 * T * t + 0.5 * (T * T - 1.0)) / t2,
          ((T + 1.0) * t - T * L - 0.5 * (T * T - 1.0)) / t2,
          (0.5 * t2 - t + L) / t2};
}

struct RadialForms {
  SymTridiagonal stiffness;
  SymTridiagonal mass;
  std::size_t first_node = 0;  // 1 when the inner node is eliminated
  double nu2 = 0.0;
  std::vector<double> element_stiffness;  // (a + b) / (2h)
  std::vector<InverseRMoments> element_moments;

  /// u^T K u summed element by element; exact zero for constants at nu = 0.
  double energy(std::span<const double> x) const noexcept {
    const std::size_t ne = element_stiffness.size();
    double e = 0.0;
    for (std::size_t k = 0; k < ne; ++k) {
      const double x0 = (k < first_node) ? 0.0 : x[k - first_node];
      const double x1 = x[k + 1 - first_node];
      const auto& m = element_moments[k];
      e += element_stiffness[k] * (x1 - x0) * (x1 - x0) +
           nu2 * (m.i11 * x0 * x0 + 2.0 * m.i12 * x0 * x1 + m.i22 * x1 * x1);
    }
    return e;
  }
};

/// P1 forms on the uniform grid with r-weighted element integrals done exactly.
inline RadialForms assemble_radial(const ModeProblem& p, int n_elements) {
  const double R0 = p.annulus.R0, R1 = p.annulus.R1;
  const double h = (R1 - R0) / n_elements;
  const double nu2 = p.nu() * p.nu();
  const std::size_t nodes = static_cast<std::size_t>(n_elements) + 1;

  std::vector<double> kd(nodes, 0.0), ko(nodes - 1, 0.0), md(nodes, 0.0), mo(nodes - 1, 0.0);
  RadialForms f;
  f.nu2 = nu2;
  f.element_stiffness.reserve(static_cast<std::size_t>(n_elements));
  f.element_moments.reserve(static_cast<std::size_t>(n_elements));
  for (int e = 0; e < n_elements; ++e) {
    const double a = R0 + e * h;
    const double b = (e + 1 == n_elements) ? R1 : R0 + (e + 1) * h;
    const double he = b - a;
    const double ks = 0.5 * (a + b) / he;
    const auto mom = inverse_r_moments(a, he);
    f.element_stiffness.push_back(ks);
    f.element_moments.push_back(mom);
    kd[e] += ks + nu2 * mom.i11;
    kd[e + 1] += ks + nu2 * mom.i22;
    ko[e] += -ks + nu2 * mom.i12;
    md[e] += he * (3.0 * a + b) / 12.0;
    md[e + 1] += he * (a + 3.0 * b) / 12.0;
    mo[e] += he * (a + b) / 12.0;
  }

  f.first_node = p.inner_bc == InnerBC::Dirichlet ? 1 : 0;
  const auto off = static_cast<std::ptrdiff_t>(f.first_node);
  f.stiffness.diag.assign(kd.begin() + off, kd.end());
  f.stiffness.off.assign(ko.begin() + off, ko.end());
  f.mass.diag.assign(md.begin() + off, md.end());
  f.mass.off.assign(mo.begin() + off, mo.end());
  return f;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline RadialEigenResult solve_mode_once(const ModeProblem& p, int n_elements, const RadialSolveOptions& opt) {
  const RadialForms f = assemble_radial(p, n_elements);
  const std::size_t n = f.stiffness.size();
  const double shift = p.inner_bc == InnerBC::Dirichlet ? 0.0 : opt.neumann_shift;

  SymTridiagonal shifted = f.stiffness;
  for (std::size_t i = 0; i < n; ++i) shifted.diag[i] -= shift * f.mass.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) shifted.off[i] -= shift * f.mass.off[i];
  const TridiagonalLDLT solver(shifted);

  const double k_norm = f.stiffness.inf_norm();
  const double m_norm = f.mass.inf_norm();

  std::vector<double> x(n, 1.0), mx(n), kx(n), r(n);
  std::vector<double> history;
  double lambda = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    f.mass.multiply(x, mx);
    x = mx;
    solver.solve_in_place(x);
    f.mass.multiply(x, mx);
    const double mnorm = std::sqrt(dot(x, mx));
    for (std::size_t i = 0; i < n; ++i) {
      x[i] /= mnorm;
      mx[i] /= mnorm;
    }
    f.stiffness.multiply(x, kx);
    lambda = f.energy(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = kx[i] - lambda * mx[i];
    const double backward = norm2(r) / ((k_norm + std::fabs(lambda) * m_norm) * norm2(x));
    history.push_back(backward);
    if (backward <= opt.tol) {
      RadialEigenResult res;
      res.problem = p;
      res.mu = lambda;
      res.residual = backward;
      res.iterations = it;
      const double h = (p.annulus.R1 - p.annulus.R0) / n_elements;
      res.grid.resize(static_cast<std::size_t>(n_elements) + 1);
      for (int i = 0; i <= n_elements; ++i) res.grid[i] = p.annulus.R0 + i * h;
      res.grid.back() = p.annulus.R1;
      res.u.assign(res.grid.size(), 0.0);
      const double sign = x.back() < 0.0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < n; ++i) res.u[i + f.first_node] = sign * x[i];
      return res;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "radial inverse iteration did not converge (last residual %.3e)", history.back());
  throw ConvergenceError(buf, std::move(history));
}

}  // namespace detail

/// Lowest eigenpair of one mode operator by P1 elements and shift-invert
/// inverse iteration. The error estimate compares against the half-resolution
/// solve assuming second-order convergence.
inline RadialEigenResult solve_mode(const ModeProblem& p, int n_elements = kDefaultRadialElements,
                                    const RadialSolveOptions& opt = {}) {
  if (n_elements < 8) throw InvalidArgument("solve_mode: need at least 8 elements");
  if (!std::isfinite(p.flux.raw)) throw InvalidArgument("solve_mode: flux must be finite");
  RadialEigenResult fine = detail::solve_mode_once(p, n_elements, opt);
  const RadialEigenResult coarse = detail::solve_mode_once(p, n_elements / 2, opt);
  fine.estimated_error = std::fabs(fine.mu - coarse.mu) / 3.0;
  fine.mu_extrapolated = fine.mu + (fine.mu - coarse.mu) / 3.0;
  return fine;
}

struct ModeRow {
  long mode = 0;
  double nu = 0.0;
  double mu = 0.0;
  double estimated_error = 0.0;
};

struct AnnulusEigenvalue {
  double lambda = 0.0;
  long minimizing_mode = 0;
  std::vector<ModeRow> per_mode;
  RadialEigenResult ground_state;  ///< result for the minimizing mode
  double estimated_error() const noexcept { return ground_state.estimated_error; }
};

/// lambda = min over |m| <= m_window of mu_m at the canonical flux.
inline AnnulusEigenvalue annulus_eigenvalue(const AnnulusSpec& a, const Flux& phi, InnerBC bc,
                                            int n_elements = kDefaultRadialElements,
                                            int m_window = kDefaultModeWindow,
                                            const RadialSolveOptions& opt = {}) {
  if (m_window < 0) throw InvalidArgument("annulus_eigenvalue: m_window must be nonnegative");
  const Flux canonical = reduce_flux(phi.reduced);
  AnnulusEigenvalue out;
  bool have = false;
  // m = 0 first so that ties resolve to the radial mode
  std::vector<long> modes{0};
  for (long m = 1; m <= m_window; ++m) {
    modes.push_back(m);
    modes.push_back(-m);
  }
  for (long m : modes) {
    ModeProblem p{a, canonical, m, bc};
    RadialEigenResult r = solve_mode(p, n_elements, opt);
    out.per_mode.push_back({m, p.nu(), r.mu, r.estimated_error});
    if (!have || r.mu < out.lambda - 1e-14 * std::fabs(out.lambda)) {
      out.lambda = r.mu;
      out.minimizing_mode = m;
      out.ground_state = std::move(r);
      have = true;
    }
  }

  // V_m >= V_0 pointwise, so mu must be nondecreasing in |phi - m|.
  std::vector<ModeRow> sorted = out.per_mode;
  std::sort(sorted.begin(), sorted.end(), [](const ModeRow& x, const ModeRow& y) {
    return x.nu < y.nu || (x.nu == y.nu && x.mode < y.mode);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double slack = sorted[i].estimated_error + sorted[i - 1].estimated_error +
                         1e-12 * std::max(1.0, std::fabs(sorted[i].mu));
    if (sorted[i].mu < sorted[i - 1].mu - slack)
      throw Error("annulus_eigenvalue: mode energies not monotone in |phi - m|");
  }
  std::sort(out.per_mode.begin(), out.per_mode.end(),
            [](const ModeRow& x, const ModeRow& y) { return x.mode < y.mode; });
  return out;
}

/// Discrete checks of positivity and monotonicity of u, N = r u', and
/// U = u'^2 + phi^2 u^2 / r^2 on interior nodes. Violations are measured
/// relative to the maximum magnitude of the quantity concerned. A negative
/// `tol` selects 10 x the eigenvalue error estimate.
inline MonotonicityReport monotonicity_report(const RadialEigenResult& res, const Flux& phi, double tol = -1.0) {
  if (tol < 0.0) tol = 10.0 * res.estimated_error;
  tol = std::max(tol, 1e-12);
  const auto& r = res.grid;
  const auto& u = res.u;
  const std::size_t n = u.size();
  const double h = r[1] - r[0];
  const double p2 = phi.reduced * phi.reduced;

  MonotonicityReport rep;
  rep.tolerance = tol;

  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::fabs(v));
  const std::size_t first = res.problem.inner_bc == InnerBC::Dirichlet ? 1 : 0;
  double umin = u[first];
  for (std::size_t i = first; i < n; ++i) umin = std::min(umin, u[i]);
  rep.u_positive = umin > 0.0;
  const double v_pos = umin > 0.0 ? 0.0 : -umin / umax;

  double dmin = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) dmin = std::min(dmin, u[i + 1] - u[i]);
  const double v_inc = -dmin / umax;
  rep.u_increasing = v_inc <= tol;

  std::vector<double> N(n, 0.0), U(n, 0.0);
  double nmax = 0.0, umag = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double du = (u[i + 1] - u[i - 1]) / (2.0 * h);
    N[i] = r[i] * du;
    U[i] = du * du + p2 * u[i] * u[i] / (r[i] * r[i]);
    nmax = std::max(nmax, std::fabs(N[i]));
    umag = std::max(umag, std::fabs(U[i]));
  }
  double nmin = 0.0, rise = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) nmin = std::min(nmin, N[i]);
  for (std::size_t i = 1; i + 2 < n; ++i) rise = std::max(rise, U[i + 1] - U[i]);
  const double v_n = nmax > 0.0 ? -nmin / nmax : 0.0;
  const double v_u = umag > 0.0 ? rise / umag : 0.0;
  rep.N_positive = v_n <= tol;
  rep.U_decreasing = v_u <= tol;
  rep.worst_violation = std::max({v_pos, v_inc, v_n, v_u});
  return rep;
}

/// CSV columns: R0,R1,phi,m,bc,n,mu,err
inline std::string radial_csv_header() { return "R0,R1,phi,m,bc,n,mu,err"; }

inline std::string radial_csv_row(const AnnulusSpec& a, double phi, long m, InnerBC bc, int n, double mu,
                                  double err) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%ld,%s,%d,%.17g,%.6e", a.R0, a.R1, phi, m, to_string(bc), n,
                mu, err);
  return buf;
}

}  // namespace fluxspec
