#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxspec/errors.hpp"
#include "fluxspec/flux.hpp"
#include "fluxspec/geometry.hpp"
#include "fluxspec/radial.hpp"

namespace fluxspec {

inline constexpr int kDefaultTrialElements = 4096;
inline constexpr int kDefaultQuadCells = 512;

/// Clamped cubic spline through equally spaced samples.
class CubicSpline {
public:
  CubicSpline() = default;
  CubicSpline(double x0, double h, std::vector<double> y, double slope_left, double slope_right)
      : x0_(x0), h_(h), y_(std::move(y)) {
    const std::size_t n = y_.size();
    if (n < 4 || !(h > 0.0)) throw InvalidArgument("CubicSpline: need at least 4 samples and h > 0");
    // second derivatives from the clamped tridiagonal system
    std::vector<double> diag(n, 4.0), rhs(n);
    diag.front() = 2.0;
    diag.back() = 2.0;
    const double ih = 1.0 / h;
    rhs.front() = 6.0 * ih * ((y_[1] - y_[0]) * ih - slope_left);
    rhs.back() = 6.0 * ih * (slope_right - (y_[n - 1] - y_[n - 2]) * ih);
    for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = 6.0 * ih * ih * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]);
    for (std::size_t i = 1; i < n; ++i) {
      const double w = 1.0 / diag[i - 1];
      diag[i] -= w;
      rhs[i] -= w * rhs[i - 1];
    }
    m_.assign(n, 0.0);
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - m_[i + 1]) / diag[i];
  }

  double x_min() const noexcept { return x0_; }
  double x_max() const noexcept { return x0_ + h_ * static_cast<double>(y_.size() - 1); }
  double step() const noexcept { return h_; }
  std::size_t intervals() const noexcept { return y_.empty() ? 0 : y_.size() - 1; }

  double value(double x) const noexcept {
    const auto [i, t] = locate(x);
    const double a = 1.0 - t, b = t;
    return a * y_[i] + b * y_[i + 1] + h_ * h_ / 6.0 * ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]);
  }

  double derivative(double x) const noexcept {
    const auto [i, t] = locate(x);
    const double a = 1.0 - t, b = t;
    return (y_[i + 1] - y_[i]) / h_ + h_ / 6.0 * (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]);
  }

private:
  std::pair<std::size_t, double> locate(double x) const noexcept {
    const double q = (x - x0_) / h_;
    const std::size_t last = y_.size() - 2;
    std::size_t i = q <= 0.0 ? 0 : std::min(static_cast<std::size_t>(q), last);
    return {i, q - static_cast<double>(i)};
  }

  double x0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;
};

namespace detail {

// 5-point Gauss-Legendre on [0, 1]
inline constexpr std::array<double, 5> kGlX{0.046910077030668004, 0.23076534494715845, 0.5, 0.76923465505284155,
                                            0.953089922969332};
inline constexpr std::array<double, 5> kGlW{0.11846344252809454, 0.23931433524968324, 64.0 / 225.0,
                                            0.23931433524968324, 0.11846344252809454};

inline CubicSpline profile_spline(const RadialEigenResult& r) {
  const auto& x = r.grid;
  const auto& u = r.u;
  const double h = x[1] - x[0];
  double left = 0.0;
  if (r.problem.inner_bc == InnerBC::Dirichlet)
    left = (-11.0 * u[0] + 18.0 * u[1] - 9.0 * u[2] + 2.0 * u[3]) / (6.0 * h);
  return CubicSpline(x.front(), h, u, left, 0.0);
}

/// Cumulative radial integrals of a radial function f extended by the
/// constant f(R1) beyond R1:
///   energy(rho) = int_{R0}^{rho} (f'^2 + phi^2 f^2 / r^2) r dr,
///   mass(rho)   = int_{R0}^{rho} f^2 r dr.
class RadialIntegrals {
public:
  RadialIntegrals() = default;
  RadialIntegrals(const CubicSpline* s, double phi) : s_(s), p2_(phi * phi) {
    const std::size_t n = s->intervals();
    ecum_.assign(n + 1, 0.0);
    mcum_.assign(n + 1, 0.0);
    const double h = s->step();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = s->x_min() + h * static_cast<double>(i);
      const auto [e, m] = piece(a, a + h);
      ecum_[i + 1] = ecum_[i] + e;
      mcum_[i + 1] = mcum_[i] + m;
    }
    u1_ = s->value(s->x_max());
  }

  double edge_value() const noexcept { return u1_; }

  double energy(double rho) const noexcept { return eval(rho, true); }
  double mass(double rho) const noexcept { return eval(rho, false); }

private:
  std::pair<double, double> piece(double a, double b) const noexcept {
    double e = 0.0, m = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double r = a + kGlX[q] * (b - a);
      const double f = s_->value(r), d = s_->derivative(r);
      e += kGlW[q] * (d * d + p2_ * f * f / (r * r)) * r;
      m += kGlW[q] * f * f * r;
    }
    return {e * (b - a), m * (b - a)};
  }

  double eval(double rho, bool energy) const noexcept {
    const double R0 = s_->x_min(), R1 = s_->x_max();
    if (rho <= R0) return 0.0;
    if (rho >= R1) {
      const double base = energy ? ecum_.back() : mcum_.back();
      return energy ? base + p2_ * u1_ * u1_ * std::log(rho / R1) : base + 0.5 * u1_ * u1_ * (rho * rho - R1 * R1);
    }
    const double h = s_->step();
    const std::size_t i = std::min(static_cast<std::size_t>((rho - R0) / h), ecum_.size() - 2);
    const double a = R0 + h * static_cast<double>(i);
    const auto [e, m] = piece(a, rho);
    return energy ? ecum_[i] + e : mcum_[i] + m;
  }

  const CubicSpline* s_ = nullptr;
  double p2_ = 0.0;
  double u1_ = 0.0;
  std::vector<double> ecum_, mcum_;
};

struct ThetaIntegral {
  double value = 0.0;
  bool crowded = false;  ///< some cell contains more than one crossing of R = R1
};

/// Periodic integral over theta, split at the angles where R(theta) = R1 so
/// that each piece has a smooth integrand; 5-point Gauss-Legendre per piece.
template <class F>
ThetaIntegral integrate_theta(const StarDomain& dom, double R1, int cells, F&& f) {
  ThetaIntegral out;
  const double dth = kTwoPi / cells;
  const auto g = [&](double th) { return dom.outer_radius(th) - R1; };
  std::vector<double> cuts;
  for (int j = 0; j < cells; ++j) {
    const double a = j * dth, b = a + dth;
    cuts.clear();
    cuts.push_back(a);
    // probe the cell at a few interior points to catch multiple crossings
    constexpr int probes = 4;
    double xa = a, ga = g(a);
    for (int k = 1; k <= probes; ++k) {
      const double xb = a + dth * k / probes;
      const double gb = g(xb);
      if ((ga < 0.0) != (gb < 0.0)) {
        double lo = xa, hi = xb, glo = ga;
        for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = g(mid);
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        cuts.push_back(0.5 * (lo + hi));
      }
      xa = xb;
      ga = gb;
    }
    if (cuts.size() > 2) out.crowded = true;
    cuts.push_back(b);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double lo = cuts[p], hi = cuts[p + 1];
      double s = 0.0;
      for (int q = 0; q < 5; ++q) s += kGlW[q] * f(lo + kGlX[q] * (hi - lo));
      out.value += s * (hi - lo);
    }
  }
  return out;
}

}  // namespace detail

/// Radial trial function built from the matched-annulus ground state u:
/// zero in the hole (inner Dirichlet variant), u on (R0, R1), u(R1) beyond R1.
/// Distances are measured from the hole center.
struct TrialState {
  AnnulusSpec source_annulus{1.0, 2.0};
  InnerBC bc_variant = InnerBC::Dirichlet;
  Flux flux;
  RadialEigenResult profile;
  CubicSpline spline;
  CubicSpline coarse_spline;  ///< same construction at half resolution, for error bars

  double value(double r) const noexcept {
    if (r <= source_annulus.R0) return bc_variant == InnerBC::Dirichlet ? 0.0 : spline.value(source_annulus.R0);
    if (r >= source_annulus.R1) return spline.value(source_annulus.R1);
    return spline.value(r);
  }
  double derivative(double r) const noexcept {
    if (r <= source_annulus.R0 || r >= source_annulus.R1) return 0.0;
    return spline.derivative(r);
  }
  /// U(r) = f'(r)^2 + phi^2 f(r)^2 / r^2 at the canonical flux.
  double U(double r) const noexcept {
    const double d = derivative(r), f = value(r);
    return d * d + flux.reduced * flux.reduced * f * f / (r * r);
  }
  double edge_value() const noexcept { return spline.value(source_annulus.R1); }
};

inline TrialState build_trial_state(const StarDomain& dom, const Flux& phi, InnerBC bc,
                                    int n_elements = kDefaultTrialElements, const RadialSolveOptions& opt = {}) {
  if (n_elements < 16) throw InvalidArgument("build_trial_state: need at least 16 elements");
  TrialState f;
  f.source_annulus = matched_annulus(dom);
  f.bc_variant = bc;
  f.flux = reduce_flux(phi.reduced);
  const ModeProblem p{f.source_annulus, f.flux, 0, bc};
  f.profile = solve_mode(p, n_elements, opt);
  f.spline = detail::profile_spline(f.profile);
  f.coarse_spline = detail::profile_spline(detail::solve_mode_once(p, n_elements / 2, opt));
  return f;
}

struct CertificateReport {
  std::string label;
  double phi = 0.0;  ///< canonical flux
  InnerBC bc = InnerBC::Dirichlet;

  double rq_value = 0.0;
  double rq_error = 0.0;
  double lambda_annulus = 0.0;
  double lambda_annulus_error = 0.0;
  std::optional<double> lambda_domain;
  double lambda_domain_error = 0.0;

  double mass_domain = 0.0;   ///< ||f||^2 on the domain
  double mass_annulus = 0.0;  ///< ||u||^2 on the matched annulus
  double mass_gap = 0.0;
  double energy_domain = 0.0;
  double energy_annulus = 0.0;
  double energy_gap = 0.0;

  double margin_factor = 10.0;
  bool upper_bound_ok = true;  ///< lambda_domain <= rq + tol (true when no domain value)
  bool below_annulus = false;  ///< rq <= lambda_annulus + tol
  bool strictly_below = false; ///< lambda_annulus - rq > margin_factor * tol
  bool mass_gap_positive = false;
  bool energy_gap_nonnegative = false;
  bool quadrature_warning = false;

  double sandwich_tolerance() const noexcept { return rq_error + lambda_annulus_error; }
};

/// Sets the lower end of the sandwich from a planar solve on the domain.
inline void attach_domain_eigenvalue(CertificateReport& rep, double lambda, double error) {
  rep.lambda_domain = lambda;
  rep.lambda_domain_error = std::isfinite(error) ? error : 0.0;
  const double tol = rep.rq_error + rep.lambda_domain_error + 1e-12 * std::max(1.0, std::fabs(lambda));
  rep.upper_bound_ok = lambda <= rep.rq_value + tol;
}

namespace detail {

struct DomainIntegrals {
  double energy = 0.0;
  double mass = 0.0;
  bool crowded = false;
};

inline DomainIntegrals domain_integrals(const CubicSpline& s, double phi, const StarDomain& dom, int cells) {
  const RadialIntegrals I(&s, phi);
  const double R1 = s.x_max();
  DomainIntegrals d;
  const auto e = integrate_theta(dom, R1, cells, [&](double th) { return I.energy(dom.outer_radius(th)); });
  const auto m = integrate_theta(dom, R1, cells, [&](double th) { return I.mass(dom.outer_radius(th)); });
  d.energy = e.value;
  d.mass = m.value;
  d.crowded = e.crowded || m.crowded;
  return d;
}

inline void check_trial_domain(const TrialState& f, const StarDomain& dom, const Flux& phi) {
  if (std::fabs(reduce_flux(phi.reduced).reduced - f.flux.reduced) > 1e-14)
    throw InvalidArgument("trial state was built for a different flux");
  const AnnulusSpec a = matched_annulus(dom);
  if (std::fabs(a.R0 - f.source_annulus.R0) > 1e-12 * a.R1 || std::fabs(a.R1 - f.source_annulus.R1) > 1e-12 * a.R1)
    throw InvalidArgument("trial state was built for a different matched annulus");
}

}  // namespace detail

/// Rayleigh quotient of the trial state on the domain, with the matched
/// annulus quantities and the sandwich flags. The error bar adds the change
/// under halving the angular cells and the Richardson estimate of the
/// profile interpolation error.
inline CertificateReport rayleigh_quotient(const TrialState& f, const StarDomain& dom, const Flux& phi,
                                           int quad_n = kDefaultQuadCells, double margin_factor = 10.0) {
  if (quad_n < 64) throw InvalidArgument("rayleigh_quotient: quad_n must be at least 64");
  detail::check_trial_domain(f, dom, phi);
  const double p = f.flux.reduced;

  const auto fine = detail::domain_integrals(f.spline, p, dom, quad_n);
  const auto half = detail::domain_integrals(f.spline, p, dom, quad_n / 2);
  const auto coarse = detail::domain_integrals(f.coarse_spline, p, dom, quad_n);
  const detail::RadialIntegrals I(&f.spline, p);
  const double R1 = f.source_annulus.R1;

  CertificateReport rep;
  rep.label = dom.label();
  rep.phi = p;
  rep.bc = f.bc_variant;
  rep.margin_factor = margin_factor;
  rep.quadrature_warning = fine.crowded;

  const auto quotient = [](double e, double m) { return m > 0.0 ? e / m : 0.0; };
  rep.rq_value = quotient(fine.energy, fine.mass);
  const double rq_half = quotient(half.energy, half.mass);
  const double rq_coarse = quotient(coarse.energy, coarse.mass);
  rep.rq_error = std::fabs(rep.rq_value - rq_half) + std::fabs(rep.rq_value - rq_coarse) / 3.0;

  rep.lambda_annulus = f.profile.mu_extrapolated;
  rep.lambda_annulus_error = f.profile.estimated_error;

  rep.mass_domain = fine.mass;
  rep.energy_domain = fine.energy;
  rep.mass_annulus = kTwoPi * I.mass(R1);
  rep.energy_annulus = kTwoPi * I.energy(R1);
  rep.mass_gap = rep.mass_domain - rep.mass_annulus;
  rep.energy_gap = rep.energy_annulus - rep.energy_domain;

  const double tol = rep.sandwich_tolerance() + 1e-12 * std::max(1.0, rep.lambda_annulus);
  rep.below_annulus = rep.rq_value <= rep.lambda_annulus + tol;
  rep.strictly_below = rep.lambda_annulus - rep.rq_value > margin_factor * tol;
  const double mass_tol = 1e-10 * std::max(1.0, rep.mass_annulus);
  rep.mass_gap_positive = rep.mass_gap > mass_tol;
  rep.energy_gap_nonnegative = rep.energy_gap >= -1e-10 * std::max(1.0, rep.energy_annulus);
  return rep;
}

/// Region-wise split of the mass and energy of the trial state:
/// common part (domain and matched annulus), the part of the domain outside
/// the annulus (r > R1), and the part of the annulus missing from the domain.
struct LemmaDecomposition {
  double mass_common = 0.0;
  double mass_outside = 0.0;
  double mass_missing = 0.0;
  double energy_common = 0.0;
  double energy_outside = 0.0;
  double energy_missing = 0.0;

  double area_outside = 0.0;
  double area_missing = 0.0;
  double measure_defect = 0.0;  ///< |area_outside - area_missing|

  double U_R1 = 0.0;                ///< phi^2 u(R1)^2 / R1^2
  std::optional<double> u_slack;    ///< min of U(r) - U(R1) over the missing region; empty if it is empty
  double mass_gap_consistency = 0.0;  ///< |(outside - missing) - mass_gap| against a direct evaluation
};

inline LemmaDecomposition lemma_decomposition(const TrialState& f, const StarDomain& dom, const Flux& phi,
                                              int quad_n = kDefaultQuadCells) {
  if (quad_n < 64) throw InvalidArgument("lemma_decomposition: quad_n must be at least 64");
  detail::check_trial_domain(f, dom, phi);
  const double p = f.flux.reduced;
  const double R0 = f.source_annulus.R0, R1 = f.source_annulus.R1;
  const detail::RadialIntegrals I(&f.spline, p);
  const double u1 = I.edge_value();
  const double E1 = I.energy(R1), M1 = I.mass(R1);

  LemmaDecomposition d;
  const auto integ = [&](auto&& fn) { return detail::integrate_theta(dom, R1, quad_n, fn).value; };
  d.mass_common = integ([&](double th) { return I.mass(std::min(dom.outer_radius(th), R1)); });
  d.energy_common = integ([&](double th) { return I.energy(std::min(dom.outer_radius(th), R1)); });
  d.mass_outside = integ([&](double th) {
    const double R = dom.outer_radius(th);
    return R > R1 ? 0.5 * u1 * u1 * (R * R - R1 * R1) : 0.0;
  });
  d.energy_outside = integ([&](double th) {
    const double R = dom.outer_radius(th);
    return R > R1 ? p * p * u1 * u1 * std::log(R / R1) : 0.0;
  });
  d.mass_missing = integ([&](double th) {
    const double R = dom.outer_radius(th);
    return R < R1 ? M1 - I.mass(R) : 0.0;
  });
  d.energy_missing = integ([&](double th) {
    const double R = dom.outer_radius(th);
    return R < R1 ? E1 - I.energy(R) : 0.0;
  });
  d.area_outside = integ([&](double th) {
    const double R = dom.outer_radius(th);
    return R > R1 ? 0.5 * (R * R - R1 * R1) : 0.0;
  });
  d.area_missing = integ([&](double th) {
    const double R = dom.outer_radius(th);
    return R < R1 ? 0.5 * (R1 * R1 - R * R) : 0.0;
  });
  d.measure_defect = std::fabs(d.area_outside - d.area_missing);

  d.U_R1 = f.U(R1);
  const double rmin = std::max(R0, dom.outer_radius_range().first);
  if (rmin < R1) {
    // sample U on a fine grid covering [rmin, R1]
    const double h = f.spline.step() / 4.0;
    double slack = std::numeric_limits<double>::infinity();
    for (double r = rmin; r < R1; r += h) slack = std::min(slack, f.U(r) - d.U_R1);
    slack = std::min(slack, f.U(R1 - 1e-12 * R1) - d.U_R1);
    d.u_slack = slack;
  }

  const auto direct = detail::domain_integrals(f.spline, p, dom, quad_n);
  const double gap = direct.mass - kTwoPi * M1;
  d.mass_gap_consistency = std::fabs((d.mass_outside - d.mass_missing) - gap);
  return d;
}

// ---- serialization -------------------------------------------------------------

inline std::string certificate_csv_header() {
  return "label,phi,bc,rq,rq_err,lambda_annulus,lambda_annulus_err,lambda_domain,lambda_domain_err,"
         "mass_gap,energy_gap,upper_bound_ok,below_annulus,strictly_below,mass_gap_positive";
}

namespace detail {
inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace detail

inline std::string certificate_csv_row(const CertificateReport& r) {
  char dom[64] = "", dom_err[64] = "";
  if (r.lambda_domain) {
    std::snprintf(dom, sizeof dom, "%.12g", *r.lambda_domain);
    std::snprintf(dom_err, sizeof dom_err, "%.3e", r.lambda_domain_error);
  }
  char buf[512];
  std::snprintf(buf, sizeof buf, ",%.12g,%s,%.12g,%.3e,%.12g,%.3e,%s,%s,%.6e,%.6e,%s,%s,%s,%s", r.phi,
                to_string(r.bc), r.rq_value, r.rq_error, r.lambda_annulus, r.lambda_annulus_error, dom, dom_err,
                r.mass_gap, r.energy_gap, r.upper_bound_ok ? "true" : "false", r.below_annulus ? "true" : "false",
                r.strictly_below ? "true" : "false", r.mass_gap_positive ? "true" : "false");
  return detail::csv_quote(r.label) + buf;
}

inline nlohmann::json to_json(const CertificateReport& r) {
  nlohmann::json j{{"label", r.label},
                   {"phi", r.phi},
                   {"bc", to_string(r.bc)},
                   {"rq_value", r.rq_value},
                   {"rq_error", r.rq_error},
                   {"lambda_annulus", r.lambda_annulus},
                   {"lambda_annulus_error", r.lambda_annulus_error},
                   {"lambda_domain", nullptr},
                   {"lambda_domain_error", nullptr},
                   {"mass_domain", r.mass_domain},
                   {"mass_annulus", r.mass_annulus},
                   {"mass_gap", r.mass_gap},
                   {"energy_domain", r.energy_domain},
                   {"energy_annulus", r.energy_annulus},
                   {"energy_gap", r.energy_gap},
                   {"margin_factor", r.margin_factor},
                   {"flags",
                    {{"upper_bound_ok", r.upper_bound_ok},
                     {"below_annulus", r.below_annulus},
                     {"strictly_below", r.strictly_below},
                     {"mass_gap_positive", r.mass_gap_positive},
                     {"energy_gap_nonnegative", r.energy_gap_nonnegative},
                     {"quadrature_warning", r.quadrature_warning}}}};
  if (r.lambda_domain) {
    j["lambda_domain"] = *r.lambda_domain;
    j["lambda_domain_error"] = r.lambda_domain_error;
  }
  return j;
}

inline nlohmann::json to_json(const LemmaDecomposition& d) {
  return {{"mass", {{"common", d.mass_common}, {"outside", d.mass_outside}, {"missing", d.mass_missing}}},
          {"energy", {{"common", d.energy_common}, {"outside", d.energy_outside}, {"missing", d.energy_missing}}},
          {"area_outside", d.area_outside},
          {"area_missing", d.area_missing},
          {"measure_defect", d.measure_defect},
          {"U_R1", d.U_R1},
          {"u_slack", d.u_slack ? nlohmann::json(*d.u_slack) : nlohmann::json(nullptr)},
          {"mass_gap_consistency", d.mass_gap_consistency}};
}

}  // namespace fluxspec
