#include <cmath>

#include <gtest/gtest.h>

#include "fluxspec/certificates.hpp"
#include "fluxspec/halfflux_oracle.hpp"
#include "fluxspec/planar/solve.hpp"

using namespace fluxspec;

namespace {

struct Brute {
  double mass = 0.0;
  double energy = 0.0;
};

// midpoint rule in (r, theta), independent of the spline integrals
Brute brute_force(const TrialState& f, const StarDomain& d, int nr, int nt) {
  Brute b;
  const double p = f.flux.reduced;
  for (int j = 0; j < nt; ++j) {
    const double th = kTwoPi * (j + 0.5) / nt;
    const double R = d.outer_radius(th);
    const double r0 = f.source_annulus.R0;
    const double h = (R - r0) / nr;
    for (int i = 0; i < nr; ++i) {
      const double r = r0 + (i + 0.5) * h;
      const double v = f.value(r), dv = f.derivative(r);
      b.mass += v * v * r * h;
      b.energy += (dv * dv + p * p * v * v / (r * r)) * r * h;
    }
  }
  b.mass *= kTwoPi / nt;
  b.energy *= kTwoPi / nt;
  return b;
}

}  // namespace

TEST(CubicSpline, ReproducesCubicWithExactSlopes) {
  const auto g = [](double x) { return 1.0 + x - 0.5 * x * x + 0.25 * x * x * x; };
  const auto dg = [](double x) { return 1.0 - x + 0.75 * x * x; };
  std::vector<double> y;
  const double h = 0.1;
  for (int i = 0; i <= 20; ++i) y.push_back(g(1.0 + i * h));
  const CubicSpline s(1.0, h, y, dg(1.0), dg(3.0));
  for (double x : {1.0, 1.234, 2.05, 2.999}) {
    EXPECT_NEAR(s.value(x), g(x), 1e-12) << x;
    EXPECT_NEAR(s.derivative(x), dg(x), 1e-11) << x;
  }
  EXPECT_DOUBLE_EQ(s.x_max(), 3.0);
  EXPECT_THROW(CubicSpline(0.0, 0.1, {1.0, 2.0}, 0.0, 0.0), InvalidArgument);
}

TEST(Certificate, ConcentricQuotientEqualsAnnulusEigenvalue) {
  const StarDomain d = make_annulus(1.0, 2.0);
  const Flux phi = reduce_flux(0.5);
  const TrialState f = build_trial_state(d, phi, InnerBC::Dirichlet);
  const CertificateReport r = rayleigh_quotient(f, d, phi);
  const double star = halfflux_oracle(AnnulusSpec(1.0, 2.0), InnerBC::Dirichlet);
  EXPECT_NEAR(r.rq_value, star, 1e-8);
  EXPECT_NEAR(r.lambda_annulus, star, 1e-9);
  EXPECT_NEAR(r.mass_gap, 0.0, 1e-10);
  EXPECT_NEAR(r.energy_gap, 0.0, 1e-9);
  EXPECT_TRUE(r.below_annulus);
  EXPECT_FALSE(r.strictly_below);
}

TEST(Certificate, EccentricSandwich) {
  const StarDomain d = make_eccentric_annulus(1.0, 2.0, 0.3);
  const Flux phi = reduce_flux(0.5);
  const TrialState f = build_trial_state(d, phi, InnerBC::Dirichlet);
  CertificateReport r = rayleigh_quotient(f, d, phi);
  EXPECT_TRUE(r.strictly_below);
  EXPECT_TRUE(r.mass_gap_positive);
  EXPECT_TRUE(r.energy_gap_nonnegative);
  EXPECT_FALSE(r.quadrature_warning);
  EXPECT_LT(r.rq_error, 1e-6);

  PlanarOptions o;
  o.mesh.n_s = 48;
  o.mesh.n_t = 96;
  const EigenSolveResult e = planar_eigenvalue(d, phi, ProblemKind::PerforatedDirichletInner, o);
  attach_domain_eigenvalue(r, e.lambda, e.estimated_error);
  EXPECT_TRUE(r.upper_bound_ok);
  EXPECT_LT(*r.lambda_domain, r.rq_value);
  EXPECT_LT(r.rq_value, r.lambda_annulus);
}

TEST(Certificate, IntegralsAgreeWithBruteForce) {
  for (InnerBC bc : {InnerBC::Dirichlet, InnerBC::Neumann}) {
    const StarDomain d = make_perturbed_disk(2.0, 1.0, {0.0, 0.0, 0.15}, {0.1}, true);
    const Flux phi = reduce_flux(0.3);
    const TrialState f = build_trial_state(d, phi, bc, 1024);
    const CertificateReport r = rayleigh_quotient(f, d, phi);
    const Brute b = brute_force(f, d, 4000, 720);
    EXPECT_NEAR(r.mass_domain, b.mass, 1e-5 * b.mass) << to_string(bc);
    EXPECT_NEAR(r.energy_domain, b.energy, 1e-4 * b.energy) << to_string(bc);
  }
}

TEST(Certificate, NeumannZeroFluxIsConstant) {
  const StarDomain d = make_eccentric_annulus(1.0, 2.0, 0.4);
  const Flux phi = reduce_flux(0.0);
  const TrialState f = build_trial_state(d, phi, InnerBC::Neumann);
  const CertificateReport r = rayleigh_quotient(f, d, phi);
  EXPECT_NEAR(r.rq_value, 0.0, 1e-12);
  EXPECT_NEAR(r.lambda_annulus, 0.0, 1e-12);
  EXPECT_TRUE(r.below_annulus);
}

TEST(Certificate, RejectsMismatchedInput) {
  const StarDomain d = make_eccentric_annulus(1.0, 2.0, 0.3);
  const TrialState f = build_trial_state(d, reduce_flux(0.5), InnerBC::Dirichlet, 256);
  EXPECT_THROW(rayleigh_quotient(f, d, reduce_flux(0.5), 32), InvalidArgument);
  EXPECT_THROW(rayleigh_quotient(f, d, reduce_flux(0.25)), InvalidArgument);
  EXPECT_THROW(rayleigh_quotient(f, make_annulus(1.0, 3.0), reduce_flux(0.5)), InvalidArgument);
  EXPECT_THROW(lemma_decomposition(f, d, reduce_flux(0.5), 16), InvalidArgument);
}

TEST(Decomposition, MeasureIdentityAndSlack) {
  for (double delta : {0.1, 0.3, 0.5}) {
    const StarDomain d = make_eccentric_annulus(1.0, 2.0, delta);
    const Flux phi = reduce_flux(0.5);
    const TrialState f = build_trial_state(d, phi, InnerBC::Dirichlet);
    const LemmaDecomposition l = lemma_decomposition(f, d, phi);
    EXPECT_LE(l.measure_defect, 1e-8) << delta;
    EXPECT_GT(l.area_outside, 0.0);
    ASSERT_TRUE(l.u_slack.has_value());
    EXPECT_GE(*l.u_slack, -1e-12) << delta;
    EXPECT_LE(l.mass_gap_consistency, 1e-10) << delta;
    // the domain gains more mass than it loses
    EXPECT_GT(l.mass_outside, l.mass_missing);
    EXPECT_LT(l.energy_outside, l.energy_missing);
  }
}

TEST(Decomposition, ConcentricHasEmptySymmetricDifference) {
  const StarDomain d = make_annulus(1.0, 2.0);
  const Flux phi = reduce_flux(0.25);
  const TrialState f = build_trial_state(d, phi, InnerBC::Dirichlet, 512);
  const LemmaDecomposition l = lemma_decomposition(f, d, phi);
  EXPECT_NEAR(l.area_outside, 0.0, 1e-12);
  EXPECT_NEAR(l.area_missing, 0.0, 1e-12);
  EXPECT_NEAR(l.mass_outside, 0.0, 1e-12);
  EXPECT_NEAR(l.energy_missing, 0.0, 1e-12);
}

TEST(CertificateOutput, CsvAndJson) {
  const StarDomain d = make_eccentric_annulus(1.0, 2.0, 0.3);
  const TrialState f = build_trial_state(d, reduce_flux(0.5), InnerBC::Dirichlet, 256);
  const CertificateReport r = rayleigh_quotient(f, d, reduce_flux(0.5));
  const std::string header = certificate_csv_header();
  const std::string row = certificate_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_EQ(row.rfind(d.label(), 0), 0u);
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j.at("label"), d.label());
  EXPECT_TRUE(j.at("lambda_domain").is_null());
  EXPECT_TRUE(to_json(lemma_decomposition(f, d, reduce_flux(0.5))).contains("measure_defect"));
}
