#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fluxspec/halfflux_oracle.hpp"
#include "fluxspec/radial.hpp"
#include "oracles/roots.hpp"

using namespace fluxspec;

namespace {

const AnnulusSpec kUnit(1.0, 2.0);

double lambda_of(double phi, InnerBC bc, int n = kDefaultRadialElements) {
  return annulus_eigenvalue(kUnit, reduce_flux(phi), bc, n).lambda;
}

double square(double x) { return x * x; }

}  // namespace

TEST(RadialOracle, HalfFluxDirichlet) {
  const double ref = square(oracle::halfflux_dirichlet_k(1.0, 2.0));
  EXPECT_NEAR(lambda_of(0.5, InnerBC::Dirichlet, 4096), ref, 1e-6 * ref);
}

TEST(RadialOracle, HalfFluxNeumann) {
  const double ref = square(oracle::halfflux_neumann_k(1.0, 2.0));
  EXPECT_NEAR(lambda_of(0.5, InnerBC::Neumann, 4096), ref, 1e-6 * ref);
}

TEST(RadialOracle, ZeroFluxDirichletBesselRoot) {
  const double ref = square(oracle::zero_flux_dirichlet_k(1.0, 2.0));
  EXPECT_NEAR(lambda_of(0.0, InnerBC::Dirichlet, 4096), ref, 1e-6 * ref);
}

TEST(RadialOracle, OtherFluxesAgainstFrozenValues) {
  // computed once from the Bessel cross-product equations of order nu
  struct Row {
    double phi;
    InnerBC bc;
    double lambda;
  };
  const Row rows[] = {{0.1, InnerBC::Dirichlet, 1.855293437348513661}, {0.25, InnerBC::Dirichlet, 1.874078065498315178},
                      {0.1, InnerBC::Neumann, 0.004620646140420939},   {0.25, InnerBC::Neumann, 0.028868051597299316},
                      {0.3, InnerBC::Neumann, 0.041561714363892727}};
  for (const auto& r : rows) EXPECT_NEAR(lambda_of(r.phi, r.bc, 4096), r.lambda, 1e-6 * r.lambda) << r.phi;
}

TEST(RadialOracle, LibraryHalfFluxRootsAgreeWithTestOracle) {
  EXPECT_NEAR(halfflux_oracle(kUnit, InnerBC::Dirichlet), square(oracle::halfflux_dirichlet_k(1.0, 2.0)), 1e-12);
  EXPECT_NEAR(halfflux_oracle(kUnit, InnerBC::Neumann), square(oracle::halfflux_neumann_k(1.0, 2.0)), 1e-12);
  EXPECT_NEAR(halfflux_disk_oracle(1.0), square(oracle::halfflux_disk_x()), 1e-12);
  EXPECT_NEAR(halfflux_disk_oracle(2.0), square(oracle::halfflux_disk_x()) / 4.0, 1e-12);
}

TEST(RadialSolver, SecondOrderConvergence) {
  const double ref = square(oracle::halfflux_dirichlet_k(1.0, 2.0));
  std::vector<double> err;
  for (int n : {64, 128, 256, 512}) err.push_back(std::fabs(lambda_of(0.5, InnerBC::Dirichlet, n) - ref));
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.9);
}

TEST(RadialSolver, ErrorEstimateTracksTrueError) {
  const double ref = square(oracle::halfflux_dirichlet_k(1.0, 2.0));
  const RadialEigenResult r = solve_mode({kUnit, reduce_flux(0.5), 0, InnerBC::Dirichlet}, 256);
  const double err = std::fabs(r.mu - ref);
  EXPECT_GT(r.estimated_error, 0.5 * err);
  EXPECT_LT(r.estimated_error, 2.0 * err);
  EXPECT_LT(std::fabs(r.mu_extrapolated - ref), 0.01 * err);
}

TEST(RadialSolver, EigenvectorNormalizationAndSign) {
  const RadialEigenResult r = solve_mode({kUnit, reduce_flux(0.3), 0, InnerBC::Dirichlet}, 1024);
  ASSERT_EQ(r.grid.size(), r.u.size());
  EXPECT_DOUBLE_EQ(r.u.front(), 0.0);
  EXPECT_GT(r.u.back(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < r.u.size(); ++i) {
    const double h = r.grid[i + 1] - r.grid[i];
    const double a = r.u[i] * r.u[i] * r.grid[i], b = r.u[i + 1] * r.u[i + 1] * r.grid[i + 1];
    s += 0.5 * h * (a + b);
  }
  EXPECT_NEAR(s, 1.0, 1e-5);
}

TEST(RadialSolver, NeumannZeroFluxIsZero) {
  EXPECT_NEAR(lambda_of(0.0, InnerBC::Neumann), 0.0, 1e-12);
  EXPECT_NEAR(lambda_of(3.0, InnerBC::Neumann), 0.0, 1e-12);
}

TEST(RadialSolver, DirichletDominatesNeumann) {
  for (double phi : {0.0, 0.1, 0.25, 0.5}) EXPECT_GT(lambda_of(phi, InnerBC::Dirichlet), lambda_of(phi, InnerBC::Neumann));
}

TEST(RadialSolver, PeriodicAndEvenInFlux) {
  for (double phi : {0.2, 0.7}) {
    const double l = lambda_of(phi, InnerBC::Dirichlet, 512);
    EXPECT_NEAR(lambda_of(phi + 1.0, InnerBC::Dirichlet, 512), l, 1e-13);
    EXPECT_NEAR(lambda_of(-phi, InnerBC::Dirichlet, 512), l, 1e-13);
  }
}

TEST(RadialSolver, BypassingReductionSelectsAnotherMode) {
  // the raw potential at phi = 1.2 with m = 1 is the canonical m = 0 problem at 0.2
  const double canonical = solve_mode({kUnit, reduce_flux(0.2), 0, InnerBC::Dirichlet}, 512).mu;
  Flux raw{1.2, 1.2, 0, false};
  const double shifted = solve_mode({kUnit, raw, 1, InnerBC::Dirichlet}, 512).mu;
  EXPECT_NEAR(shifted, canonical, 1e-12);
}

TEST(ModeWindow, RadialModeMinimizesAndEnergiesOrdered) {
  for (double phi : {0.1, 0.25, 0.5}) {
    const AnnulusEigenvalue a = annulus_eigenvalue(kUnit, reduce_flux(phi), InnerBC::Dirichlet, 512, 3);
    EXPECT_EQ(a.minimizing_mode, 0);
    EXPECT_EQ(a.per_mode.size(), 7u);
    for (const auto& r : a.per_mode) EXPECT_GE(r.mu, a.lambda);
  }
  // at half flux m = 0 and m = 1 are degenerate; ties resolve to m = 0
  const AnnulusEigenvalue h = annulus_eigenvalue(kUnit, reduce_flux(0.5), InnerBC::Dirichlet, 512);
  EXPECT_EQ(h.minimizing_mode, 0);
  double mu1 = 0.0;
  for (const auto& r : h.per_mode)
    if (r.mode == 1) mu1 = r.mu;
  EXPECT_NEAR(mu1, h.lambda, 1e-12);
}

TEST(Monotonicity, GroundStatesAcrossTheGrid) {
  for (InnerBC bc : {InnerBC::Dirichlet, InnerBC::Neumann})
    for (double phi : {0.1, 0.25, 0.5}) {
      const AnnulusEigenvalue a = annulus_eigenvalue(kUnit, reduce_flux(phi), bc);
      const MonotonicityReport m = monotonicity_report(a.ground_state, reduce_flux(phi));
      EXPECT_TRUE(m.u_positive) << phi;
      EXPECT_TRUE(m.u_increasing) << phi;
      EXPECT_TRUE(m.U_decreasing) << phi;
      if (bc == InnerBC::Dirichlet) EXPECT_TRUE(m.N_positive) << phi;
    }
}

TEST(RadialSolver, SmallFluxNeumannIsQuadratic) {
  const double a = lambda_of(0.01, InnerBC::Neumann);
  const double b = lambda_of(0.02, InnerBC::Neumann);
  EXPECT_LT(a, 1e-2);
  EXPECT_NEAR(b / a, 4.0, 0.01);
}

TEST(RadialSolver, RejectsBadInput) {
  EXPECT_THROW(solve_mode({kUnit, reduce_flux(0.5), 0, InnerBC::Dirichlet}, 4), InvalidArgument);
  EXPECT_THROW(annulus_eigenvalue(kUnit, reduce_flux(0.5), InnerBC::Dirichlet, 64, -1), InvalidArgument);
  EXPECT_THROW(inner_bc_from_string("robin"), InvalidArgument);
}

TEST(RadialCsv, RowFormat) {
  EXPECT_EQ(radial_csv_header(), "R0,R1,phi,m,bc,n,mu,err");
  const std::string row = radial_csv_row(kUnit, 0.5, 0, InnerBC::Neumann, 64, 0.125, 1e-6);
  EXPECT_EQ(row.substr(0, 12), "1,2,0.5,0,ne");
}
