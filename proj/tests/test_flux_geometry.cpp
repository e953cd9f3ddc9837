#include <cmath>

#include <gtest/gtest.h>

#include "fluxspec/flux.hpp"
#include "fluxspec/geometry.hpp"

using namespace fluxspec;

TEST(ReduceFlux, CanonicalRepresentative) {
  const Flux f = reduce_flux(1.7);
  EXPECT_NEAR(f.reduced, 0.3, 1e-15);
  EXPECT_EQ(f.mode_shift, 2);
  EXPECT_TRUE(f.sign_flipped);
  EXPECT_NEAR(f.reconstruct(), 1.7, 1e-15);

  EXPECT_DOUBLE_EQ(reduce_flux(-0.5).reduced, 0.5);
  EXPECT_DOUBLE_EQ(reduce_flux(0.5).reduced, 0.5);
  EXPECT_DOUBLE_EQ(reduce_flux(3.0).reduced, 0.0);
  EXPECT_TRUE(reduce_flux(-4.0).is_integer());
}

TEST(ReduceFlux, EvenAndPeriodic) {
  for (double phi : {0.05, 0.2, 0.49, 0.5, 0.7, 1.3, -2.25, 12.5}) {
    const double r = reduce_flux(phi).reduced;
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 0.5);
    EXPECT_NEAR(reduce_flux(phi + 1.0).reduced, r, 1e-12) << phi;
    EXPECT_NEAR(reduce_flux(-phi).reduced, r, 1e-12) << phi;
    EXPECT_NEAR(reduce_flux(phi).reconstruct(), phi, 1e-12) << phi;
  }
}

TEST(ReduceFlux, RejectsNonFinite) {
  EXPECT_THROW(reduce_flux(std::nan("")), InvalidArgument);
  EXPECT_THROW(reduce_flux(INFINITY), InvalidArgument);
}

TEST(Annulus, Validation) {
  EXPECT_NO_THROW(AnnulusSpec(1.0, 2.0));
  EXPECT_THROW(AnnulusSpec(2.0, 1.0), InvalidArgument);
  EXPECT_THROW(AnnulusSpec(0.0, 1.0), InvalidArgument);
  EXPECT_NEAR(AnnulusSpec(1.0, 2.0).area(), 3.0 * kPi, 1e-14);
}

TEST(StarDomain, EccentricRadiusFunction) {
  const StarDomain d = make_eccentric_annulus(1.0, 2.0, 0.3);
  EXPECT_NEAR(d.outer_radius(0.0), 2.3, 1e-14);
  EXPECT_NEAR(d.outer_radius(kPi), 1.7, 1e-14);
  // |x - (delta, 0)| = R1 on the boundary
  for (double th : {0.3, 1.1, 2.9, 4.4}) {
    const double R = d.outer_radius(th);
    EXPECT_NEAR(std::hypot(R * std::cos(th) - 0.3, R * std::sin(th)), 2.0, 1e-13);
    const double h = 1e-6;
    EXPECT_NEAR(d.outer_radius_derivative(th), (d.outer_radius(th + h) - d.outer_radius(th - h)) / (2 * h), 1e-8);
  }
  const auto [lo, hi] = d.outer_radius_range();
  EXPECT_NEAR(lo, 1.7, 1e-6);
  EXPECT_NEAR(hi, 2.3, 1e-6);
  EXPECT_FALSE(d.is_concentric());
  EXPECT_TRUE(make_eccentric_annulus(1.0, 2.0, 0.0).is_concentric());
}

TEST(StarDomain, RejectsHoleTouchingBoundary) {
  EXPECT_THROW(make_eccentric_annulus(1.0, 2.0, 1.0), GeometryInfeasible);
  EXPECT_THROW(make_perturbed_disk(1.0, 0.9, {0.0, 0.3}, {}, true), GeometryInfeasible);
}

TEST(MatchedAnnulus, PreservesAreas) {
  const StarDomain e = make_eccentric_annulus(1.0, 2.0, 0.5);
  const AnnulusSpec a = matched_annulus(e);
  EXPECT_DOUBLE_EQ(a.R0, 1.0);
  EXPECT_NEAR(a.R1, 2.0, 1e-14);

  const StarDomain p = make_perturbed_disk(2.0, 0.5, {0.0, 0.2, 0.0, 0.1}, {0.05}, true);
  EXPECT_NEAR(matched_annulus(p).R1, 2.0, 1e-14);
  // area by direct quadrature of R^2 / 2
  double area = 0.0;
  const int n = 4096;
  for (int j = 0; j < n; ++j) {
    const double R = p.outer_radius(kTwoPi * j / n);
    area += 0.5 * R * R * kTwoPi / n;
  }
  EXPECT_NEAR(area, outer_area(p), 1e-12);
}

TEST(Rotate, KeepsRadiusFunctionShape) {
  const StarDomain p = make_perturbed_disk(2.0, 0.5, {0.1, 0.2}, {0.05}, true);
  const StarDomain q = rotate(p, 0.7);
  for (double th : {0.0, 1.0, 2.5}) EXPECT_NEAR(q.outer_radius(th + 0.7), p.outer_radius(th), 1e-13);
  const StarDomain e = rotate(make_eccentric_annulus(1.0, 2.0, 0.3), 1.2);
  EXPECT_NEAR(e.outer_radius(1.2), 2.3, 1e-13);
}

TEST(DomainJson, RoundTrip) {
  for (const StarDomain& d : {make_eccentric_annulus(1.0, 2.0, 0.3, 0.4),
                              make_perturbed_disk(2.0, 0.5, {0.1, 0.2}, {0.05}, true, "wavy")}) {
    const StarDomain back = domain_from_json(domain_to_json(d));
    EXPECT_EQ(back.label(), d.label());
    for (double th : {0.0, 0.9, 3.3}) EXPECT_DOUBLE_EQ(back.outer_radius(th), d.outer_radius(th));
  }
  EXPECT_THROW(domain_from_json(nlohmann::json{{"outer", {{"c0", 1.0}}}}), InvalidArgument);
}
