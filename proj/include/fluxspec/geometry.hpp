#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxspec/errors.hpp"

namespace fluxspec {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Number of equispaced angles used for pointwise domain checks.
inline constexpr int kDenseThetaSamples = 4096;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Concentric annulus R0 < |x| < R1.
struct AnnulusSpec {
  double R0 = 1.0;
  double R1 = 2.0;

  AnnulusSpec() = default;
  AnnulusSpec(double inner, double outer) : R0(inner), R1(outer) {
    if (!(inner > 0.0) || !(outer > inner) || !std::isfinite(outer))
      throw InvalidArgument("AnnulusSpec requires 0 < R0 < R1");
  }
  double area() const noexcept { return kPi * (R1 * R1 - R0 * R0); }
};

/// R(theta) = c0 + sum_k a_k cos(k theta) + b_k sin(k theta), k starting at 1.
struct TrigSeries {
  double c0 = 1.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double value(double theta) const noexcept {
    double r = c0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k)
      r += cos_coeffs[k] * std::cos(static_cast<double>(k + 1) * theta);
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k)
      r += sin_coeffs[k] * std::sin(static_cast<double>(k + 1) * theta);
    return r;
  }

  double derivative(double theta) const noexcept {
    double d = 0.0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      d -= kk * cos_coeffs[k] * std::sin(kk * theta);
    }
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      d += kk * sin_coeffs[k] * std::cos(kk * theta);
    }
    return d;
  }

  /// Sum over k of (a_k^2 + b_k^2).
  double harmonic_energy() const noexcept {
    double s = 0.0;
    for (double a : cos_coeffs) s += a * a;
    for (double b : sin_coeffs) s += b * b;
    return s;
  }

  bool is_constant() const noexcept {
    return std::all_of(cos_coeffs.begin(), cos_coeffs.end(), [](double a) { return a == 0.0; }) &&
           std::all_of(sin_coeffs.begin(), sin_coeffs.end(), [](double b) { return b == 0.0; });
  }
};

/// Circle of radius R1 whose center sits at distance `delta` from the hole
/// center in direction `angle`. Evaluated in closed form.
struct EccentricCircle {
  double R1 = 2.0;
  double delta = 0.0;
  double angle = 0.0;

  double value(double theta) const noexcept {
    const double t = theta - angle;
    const double s = std::sin(t);
    return delta * std::cos(t) + std::sqrt(R1 * R1 - delta * delta * s * s);
  }

  double derivative(double theta) const noexcept {
    const double t = theta - angle;
    const double s = std::sin(t);
    const double c = std::cos(t);
    return -delta * s - delta * delta * s * c / std::sqrt(R1 * R1 - delta * delta * s * s);
  }
};

using OuterBoundary = std::variant<TrigSeries, EccentricCircle>;

/// Planar domain with a disk hole of radius `hole_radius` at `hole_center` and
/// an outer boundary given by a radius function about the hole center.
///
/// Depending on the problem kind the hole radius is read as the obstacle
/// radius, an artificial core radius, or the radius of the field support.
class StarDomain {
public:
  StarDomain(Point2 hole_center, double hole_radius, OuterBoundary outer, std::string label = {})
      : center_(hole_center), hole_radius_(hole_radius), outer_(std::move(outer)), label_(std::move(label)) {
    validate();
  }

  const Point2& hole_center() const noexcept { return center_; }
  double hole_radius() const noexcept { return hole_radius_; }
  const OuterBoundary& outer() const noexcept { return outer_; }
  const std::string& label() const noexcept { return label_; }

  double outer_radius(double theta) const noexcept {
    return std::visit([theta](const auto& b) { return b.value(theta); }, outer_);
  }
  double outer_radius_derivative(double theta) const noexcept {
    return std::visit([theta](const auto& b) { return b.derivative(theta); }, outer_);
  }

  std::pair<double, double> outer_radius_range() const noexcept {
    double lo = outer_radius(0.0), hi = lo;
    for (int j = 1; j < kDenseThetaSamples; ++j) {
      const double r = outer_radius(kTwoPi * j / kDenseThetaSamples);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return {lo, hi};
  }

  /// True when the outer boundary is a circle centered at the hole center.
  bool is_concentric() const noexcept {
    if (const auto* t = std::get_if<TrigSeries>(&outer_)) return t->is_constant();
    return std::get<EccentricCircle>(outer_).delta == 0.0;
  }

  StarDomain with_hole_radius(double r) const { return StarDomain(center_, r, outer_, label_); }
  StarDomain with_label(std::string label) const { return StarDomain(center_, hole_radius_, outer_, std::move(label)); }

private:
  void validate() const {
    if (!(hole_radius_ > 0.0) || !std::isfinite(hole_radius_))
      throw InvalidArgument("StarDomain: hole radius must be positive and finite");
    if (const auto* e = std::get_if<EccentricCircle>(&outer_)) {
      if (!(e->R1 > 0.0) || e->delta < 0.0 || !(e->delta < e->R1))
        throw InvalidArgument("StarDomain: eccentric circle needs 0 <= delta < R1");
    }
    for (int j = 0; j < kDenseThetaSamples; ++j) {
      const double r = outer_radius(kTwoPi * j / kDenseThetaSamples);
      if (!std::isfinite(r) || !(r > 0.0))
        throw GeometryInfeasible("StarDomain: outer radius function must be positive");
      if (!(r > hole_radius_))
        throw GeometryInfeasible("StarDomain: hole touches or crosses the outer boundary");
    }
  }

  Point2 center_;
  double hole_radius_;
  OuterBoundary outer_;
  std::string label_;
};

/// Area enclosed by the outer boundary, exact from the representation.
inline double outer_area(const StarDomain& dom) {
  if (const auto* t = std::get_if<TrigSeries>(&dom.outer()))
    return kPi * t->c0 * t->c0 + 0.5 * kPi * t->harmonic_energy();
  const auto& e = std::get<EccentricCircle>(dom.outer());
  return kPi * e.R1 * e.R1;
}

/// Concentric annulus with the same hole area and the same outer area.
inline AnnulusSpec matched_annulus(const StarDomain& dom) {
  const double R1 = std::sqrt(outer_area(dom) / kPi);
  if (!(R1 > dom.hole_radius()))
    throw GeometryInfeasible("matched_annulus: hole area exceeds outer area");
  return AnnulusSpec(dom.hole_radius(), R1);
}

inline StarDomain make_annulus(double R0, double R1, std::string label = {}) {
  if (!(R0 > 0.0) || !(R1 > R0)) throw GeometryInfeasible("make_annulus: need 0 < R0 < R1");
  if (label.empty()) label = "annulus";
  return StarDomain({}, R0, TrigSeries{R1, {}, {}}, std::move(label));
}

inline StarDomain make_annulus(const AnnulusSpec& a, std::string label = {}) {
  return make_annulus(a.R0, a.R1, std::move(label));
}

inline StarDomain make_eccentric_annulus(double R0, double R1, double delta, double angle = 0.0) {
  if (!(R0 > 0.0) || delta < 0.0 || !std::isfinite(R1))
    throw InvalidArgument("make_eccentric_annulus: need R0 > 0 and delta >= 0");
  if (!(R0 + delta < R1))
    throw GeometryInfeasible("make_eccentric_annulus: hole touches the outer boundary (R0 + delta >= R1)");
  char buf[96];
  std::snprintf(buf, sizeof buf, "eccentric(R0=%g;R1=%g;delta=%g)", R0, R1, delta);
  return StarDomain({}, R0, EccentricCircle{R1, delta, angle}, buf);
}

/// Smooth perturbation of the disk of radius R1 around a hole of radius R0.
/// With `renormalize` the constant term is solved from Parseval so that the
/// enclosed area is exactly pi R1^2; otherwise c0 = R1.
inline StarDomain make_perturbed_disk(double R1, double R0, std::vector<double> cos_coeffs,
                                      std::vector<double> sin_coeffs, bool renormalize,
                                      std::string label = {}) {
  TrigSeries series{R1, std::move(cos_coeffs), std::move(sin_coeffs)};
  if (renormalize) {
    const double c0_sq = R1 * R1 - 0.5 * series.harmonic_energy();
    if (!(c0_sq > 0.0)) throw GeometryInfeasible("make_perturbed_disk: no admissible constant term");
    series.c0 = std::sqrt(c0_sq);
  }
  if (label.empty()) label = "perturbed-disk";
  try {
    return StarDomain({}, R0, std::move(series), std::move(label));
  } catch (const InvalidArgument& e) {
    throw GeometryInfeasible(e.what());
  }
}

/// Rotates the outer boundary by `alpha` about the hole center.
inline StarDomain rotate(const StarDomain& dom, double alpha) {
  if (const auto* t = std::get_if<TrigSeries>(&dom.outer())) {
    TrigSeries r{t->c0, std::vector<double>(std::max(t->cos_coeffs.size(), t->sin_coeffs.size()), 0.0),
                 std::vector<double>(std::max(t->cos_coeffs.size(), t->sin_coeffs.size()), 0.0)};
    for (std::size_t k = 0; k < r.cos_coeffs.size(); ++k) {
      const double a = k < t->cos_coeffs.size() ? t->cos_coeffs[k] : 0.0;
      const double b = k < t->sin_coeffs.size() ? t->sin_coeffs[k] : 0.0;
      const double c = std::cos(static_cast<double>(k + 1) * alpha);
      const double s = std::sin(static_cast<double>(k + 1) * alpha);
      r.cos_coeffs[k] = a * c - b * s;
      r.sin_coeffs[k] = a * s + b * c;
    }
    return StarDomain(dom.hole_center(), dom.hole_radius(), std::move(r), dom.label());
  }
  auto e = std::get<EccentricCircle>(dom.outer());
  e.angle += alpha;
  return StarDomain(dom.hole_center(), dom.hole_radius(), e, dom.label());
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json domain_to_json(const StarDomain& dom) {
  nlohmann::json j;
  j["hole_center"] = {dom.hole_center().x, dom.hole_center().y};
  j["hole_radius"] = dom.hole_radius();
  if (const auto* t = std::get_if<TrigSeries>(&dom.outer())) {
    j["outer"] = {{"c0", t->c0}, {"cos", t->cos_coeffs}, {"sin", t->sin_coeffs}};
  } else {
    const auto& e = std::get<EccentricCircle>(dom.outer());
    nlohmann::json ecc = {{"R1", e.R1}, {"delta", e.delta}};
    if (e.angle != 0.0) ecc["angle"] = e.angle;
    j["outer"] = {{"eccentric", ecc}};
  }
  j["label"] = dom.label();
  return j;
}

inline StarDomain domain_from_json(const nlohmann::json& j) {
  try {
    Point2 c;
    if (j.contains("hole_center")) {
      const auto& hc = j.at("hole_center");
      c = {hc.at(0).get<double>(), hc.at(1).get<double>()};
    }
    const double r0 = j.at("hole_radius").get<double>();
    const auto& o = j.at("outer");
    std::string label = j.value("label", std::string{});
    if (o.contains("eccentric")) {
      const auto& e = o.at("eccentric");
      EccentricCircle circle{e.at("R1").get<double>(), e.value("delta", 0.0), e.value("angle", 0.0)};
      if (!(r0 + circle.delta < circle.R1))
        throw GeometryInfeasible("domain: hole touches the outer boundary");
      return StarDomain(c, r0, circle, std::move(label));
    }
    TrigSeries t{o.at("c0").get<double>(), o.value("cos", std::vector<double>{}),
                 o.value("sin", std::vector<double>{})};
    return StarDomain(c, r0, std::move(t), std::move(label));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("domain JSON: ") + e.what());
  }
}

}  // namespace fluxspec
