#include <gtest/gtest.h>

#include <cmath>

#include "epsurf/exceptional.hpp"

namespace epsurf {
namespace {

// Independent references (arbitrary-precision eigen-solver, bisection on
// eigenvalue coalescence).
constexpr double kPtEl3Lambda = -0.192251682771607;
constexpr double kPtEl3G23 = 0.7543990133970591;
constexpr double kPtEl3Delta1 = -0.576755048314821;
constexpr double kPurpleEp2 = 1.1074363935365192;

TEST(Ep3Residuals, AgreeWithDiscriminants) {
  // On the constraint manifold A = e1 / kappa2^2 and B = -e2 / kappa2^2.
  const double k1 = 0.6;
  for (double g13 : {0.3, 0.9, 1.4}) {
    for (double g23 : {0.2, 1.1}) {
      const auto s = solve_constraints(k1, 1.0, 0.4, g13, g23);
      if (!s.feasible) continue;
      const SystemParams p = embed(s, k1, 1.0, 0.4, g13, g23);
      const DiscriminantSet d = discriminants(cubic_coeffs_reduced(p));
      const Ep3Residuals e = ep3_residuals(p);
      EXPECT_NEAR(d.A, e.e1, 1e-10 * (1 + std::abs(e.e1)));
      EXPECT_NEAR(d.B, -e.e2, 1e-10 * (1 + std::abs(e.e2)));
    }
  }
}

TEST(LambdaEp3, CentreOfMass) {
  SystemParams p{0.4, -0.1, 0.25, 0.0, 1.0, -1.0, 0, 0, 0};
  EXPECT_NEAR(lambda_ep3(p).real(), 0.25 + (0.15 - 0.35) / 3.0, 1e-15);
}

TEST(FindEp, PtGreenEp3) {
  const auto r = find_ep_along_axis(pt_specialize(1.0, 0.0, 0.0, 0.0), Axis::G13, 0.0, 2.0,
                                    ConstraintMode::PT);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].order, 3);
  EXPECT_NEAR(r.points[0].axis_value, 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_LE(std::abs(r.points[0].lambda), 1e-8);
}

TEST(FindEp, PhSymmetricEp3AndEdge) {
  SystemParams base;
  const auto r = find_ep_along_axis(base, Axis::G13, 0.0, 2.0, ConstraintMode::PHSymmetric);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].order, 3);
  EXPECT_NEAR(r.points[0].axis_value, 2.0 / std::sqrt(3.0), 1e-9);
  ASSERT_EQ(r.edges.size(), 1u);
  EXPECT_NEAR(r.edges[0].axis_value, 1.0, 1e-9);
  EXPECT_TRUE(r.edges[0].entering);
}

TEST(FindEp, PhAsymmetricEp3AtFeasibilityEdge) {
  SystemParams base;
  const auto r = find_ep_along_axis(base, Axis::G13, 1.0, 3.0, ConstraintMode::PHAsymmetric);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].order, 3);
  EXPECT_NEAR(r.points[0].axis_value, std::sqrt(8.0 / 3.0), 1e-8);

  const auto none = find_ep_along_axis(base, Axis::G13, 1.64, 3.0, ConstraintMode::PHAsymmetric);
  EXPECT_TRUE(none.points.empty());
}

TEST(FindEp, PurpleConfigurationOnExactManifold) {
  const auto r = find_ep_along_axis(pt_specialize(1.0, 0.0, kPtEl3G23, kPtEl3Delta1), Axis::G13,
                                    0.0, 2.0, ConstraintMode::PT);
  ASSERT_GE(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].order, 3);
  EXPECT_NEAR(r.points[0].axis_value, 0.4, 1e-6);
  EXPECT_NEAR(r.points[0].lambda.real(), kPtEl3Lambda, 1e-6);
}

TEST(FindEp, PurpleConfigurationRoundedInputs) {
  EpSearchOptions o;
  o.ep_tol = 1e-3;
  const auto r = find_ep_along_axis(pt_specialize(1.0, 0.0, 0.7544, -0.5768), Axis::G13, 0.0,
                                    2.0, ConstraintMode::PT, o);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points[0].order, 3);
  EXPECT_NEAR(r.points[0].axis_value, 0.4000108, 1e-6);
  EXPECT_EQ(r.points[1].order, 2);
  EXPECT_NEAR(r.points[1].axis_value, kPurpleEp2, 1e-9);
}

TEST(El3Pt, MatchesReferencePoint) {
  const ManifoldMesh m = el3_pt(401);
  ASSERT_EQ(m.slices.size(), 1u);
  const auto& s = m.slices[0];
  EXPECT_EQ(s.kappa1, 0.0);
  EXPECT_NEAR(s.footprint_hi, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(distance_to_slice(s, 0.4, kPtEl3G23), 0.0, 1e-5);
  for (const auto& smp : s.samples) {
    EXPECT_LE(smp.ep.params.omega1, 0.0);
    const DiscriminantSet d = discriminants(cubic_coeffs_reduced(smp.ep.params));
    EXPECT_LE(std::abs(d.A), 1e-9) << smp.g13;
    EXPECT_LE(std::abs(d.B), 1e-9) << smp.g13;
  }
}

TEST(El3General, KappaOneIsCircle) {
  const ManifoldMesh m = el3_general(1.0, 101);
  ASSERT_EQ(m.slices.size(), 1u);
  const auto& s = m.slices[0];
  EXPECT_NEAR(s.footprint_hi, std::sqrt(8.0 / 3.0), 1e-9);
  ASSERT_GT(s.samples.size(), 50u);
  for (const auto& smp : s.samples) {
    EXPECT_NEAR(smp.g13 * smp.g13 + smp.g23 * smp.g23, 8.0 / 3.0, 1e-8) << smp.g13;
    const Ep3Residuals e = ep3_residuals(smp.ep.params);
    EXPECT_LE(std::abs(e.e1), 1e-8);
    EXPECT_LE(std::abs(e.e2), 1e-8);
    EXPECT_TRUE(is_pseudo_hermitian(smp.ep.params, 1e-9));
  }
}

TEST(El3General, ZeroRatioMatchesPtSlice) {
  const auto gen = el3_general(0.0, 101).slices.at(0);
  const auto pt = el3_pt(101).slices.at(0);
  ASSERT_EQ(gen.samples.size(), pt.samples.size());
  for (std::size_t i = 0; i < gen.samples.size(); ++i) {
    EXPECT_NEAR(gen.samples[i].g13, pt.samples[i].g13, 1e-12);
    EXPECT_NEAR(gen.samples[i].g23, pt.samples[i].g23, 1e-6);
  }
}

TEST(Footprint, Endpoints) {
  EXPECT_NEAR(el3_footprint_max(0.0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(el3_footprint_max(1.0), std::sqrt(8.0 / 3.0), 1e-14);
}

TEST(Es3Scan, SlicesAndThreads) {
  const ManifoldMesh one = es3_scan(0.0, 2.0, 5, 41, 1);
  const ManifoldMesh many = es3_scan(0.0, 2.0, 5, 41, 4);
  ASSERT_EQ(one.slices.size(), 5u);
  EXPECT_EQ(one.slices.back().kappa1, 2.0);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.slices.size(); ++i)
    for (std::size_t j = 0; j < one.slices[i].samples.size(); ++j)
      EXPECT_EQ(one.slices[i].samples[j].g23, many.slices[i].samples[j].g23);
}

TEST(Manifold, BadArguments) {
  EXPECT_THROW(el3_pt(1), ValidationError);
  EXPECT_THROW(el3_general(-1.0, 10), ValidationError);
  EXPECT_THROW(es3_scan(1.0, 0.0, 5, 10), ValidationError);
}

}  // namespace
}  // namespace epsurf
