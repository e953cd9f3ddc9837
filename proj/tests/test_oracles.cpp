#include <cmath>

#include <gtest/gtest.h>

#include "oracles/bessel.hpp"
#include "oracles/radial_fd.hpp"
#include "oracles/roots.hpp"

// Reference values were computed once with 30-digit arithmetic and frozen.
namespace frozen {
constexpr double kHalfDirichletK = 1.393249075325588516;
constexpr double kHalfDirichletLambda = 1.941142985895607423;
constexpr double kHalfNeumannK = 0.339581601932417959;
constexpr double kHalfNeumannLambda = 0.115315664370987169;
constexpr double kZeroDirichletK = 1.360777385337008417;
constexpr double kZeroDirichletLambda = 1.851715092444625090;
constexpr double kDiskX = 1.165561185207211307;
constexpr double kDiskLambda = 1.358532876461639138;
}  // namespace frozen

TEST(BesselSeries, MatchesTabulatedValues) {
  struct Row {
    double x, j0, j1, y0, y1;
  };
  const Row rows[] = {
      {0.5, 0.938469807240813, 0.24226845767487387, -0.4445187335067066, -1.4714723926702433},
      {1.0, 0.7651976865579665, 0.44005058574493355, 0.08825696421567697, -0.7812128213002888},
      {2.7, -0.14244937004601194, 0.4416013791182531, 0.46050354907539504, 0.22763244587086398},
      {6.0, 0.15064525725099695, -0.27668385812756563, -0.28819468398157916, -0.17501034430039827},
  };
  for (const auto& r : rows) {
    EXPECT_NEAR(static_cast<double>(oracle::bessel_j(0, r.x)), r.j0, 1e-14) << r.x;
    EXPECT_NEAR(static_cast<double>(oracle::bessel_j(1, r.x)), r.j1, 1e-14) << r.x;
    EXPECT_NEAR(static_cast<double>(oracle::bessel_y0(r.x)), r.y0, 1e-14) << r.x;
    EXPECT_NEAR(static_cast<double>(oracle::bessel_y1(r.x)), r.y1, 1e-14) << r.x;
  }
}

TEST(BesselSeries, WronskianIdentity) {
  // J1 Y0 - J0 Y1 = 2 / (pi x)
  for (double x : {0.3, 1.7, 4.2, 8.5}) {
    const long double w = oracle::bessel_j(1, x) * oracle::bessel_y0(x) - oracle::bessel_j(0, x) * oracle::bessel_y1(x);
    EXPECT_NEAR(static_cast<double>(w), 2.0 / (M_PI * x), 1e-13) << x;
  }
}

TEST(TranscendentalRoots, ReproduceFrozenValues) {
  EXPECT_NEAR(oracle::halfflux_dirichlet_k(1.0, 2.0), frozen::kHalfDirichletK, 1e-13);
  EXPECT_NEAR(oracle::halfflux_neumann_k(1.0, 2.0), frozen::kHalfNeumannK, 1e-13);
  EXPECT_NEAR(oracle::zero_flux_dirichlet_k(1.0, 2.0), frozen::kZeroDirichletK, 1e-12);
  EXPECT_NEAR(oracle::halfflux_disk_x(), frozen::kDiskX, 1e-13);
  EXPECT_NEAR(frozen::kHalfDirichletK * frozen::kHalfDirichletK, frozen::kHalfDirichletLambda, 1e-15);
  EXPECT_NEAR(frozen::kHalfNeumannK * frozen::kHalfNeumannK, frozen::kHalfNeumannLambda, 1e-15);
  EXPECT_NEAR(frozen::kZeroDirichletK * frozen::kZeroDirichletK, frozen::kZeroDirichletLambda, 1e-15);
  EXPECT_NEAR(frozen::kDiskX * frozen::kDiskX, frozen::kDiskLambda, 1e-15);
}

TEST(TranscendentalRoots, HalfDirichletSatisfiesTanEquation) {
  const double k = oracle::halfflux_dirichlet_k(1.0, 2.0);
  EXPECT_NEAR(std::tan(k), 4.0 * k, 1e-11);
}

TEST(FiniteDifferenceOracle, AharonovBohmDiskAtHalfFlux) {
  const double lam = oracle::disk_ground_fd([](double) { return 0.5; }, 1.0, 4000);
  EXPECT_NEAR(lam, frozen::kDiskLambda, 2e-3 * frozen::kDiskLambda);
}

TEST(FiniteDifferenceOracle, ZeroFieldDiskIsZero) {
  EXPECT_NEAR(oracle::disk_ground_fd([](double) { return 0.0; }, 1.0, 500), 0.0, 1e-11);
}
