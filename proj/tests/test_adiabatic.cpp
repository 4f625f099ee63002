#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adiamag/adiabatic.hpp"
#include "oracles.hpp"

using namespace adiamag;

namespace
{

constexpr double kPi = std::numbers::pi;

SystemParams params(double T, double a = 1.0)
{
  SystemParams p;
  p.omega_c = 2.7;
  p.omega = 1.0;
  p.a = a;
  p.T = T;
  return p;
}

Mat6 blocks(const Mat3& f)
{
  Mat6 r = Mat6::Zero();
  r.topLeftCorner<3, 3>() = f;
  r.bottomRightCorner<3, 3>() = f;
  return r;
}

// Product state along n0: planar offset c, zero mean velocity, random planar
// and axial covariances built in the (e1(0), e2(0), n0) basis.
InitialMoments product_state(const SystemParams& p, const Vec3& n0, const Vec2& c,
                             std::mt19937_64& rng)
{
  const Mat3 f0 = oracle::frame0(n0);
  const Vec3 x = p.a * n0 + f0.col(0) * c.x() + f0.col(1) * c.y();
  InitialMoments m;
  m.mean << x, 0.5 * p.omega_c * n0.cross(x);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::Matrix4d A;
  for (int i = 0; i < 16; ++i) {
    A.data()[i] = u(rng);
  }
  Eigen::Matrix2d B;
  for (int i = 0; i < 4; ++i) {
    B.data()[i] = u(rng);
  }
  const Eigen::Matrix4d planar = A * A.transpose() + 0.1 * Eigen::Matrix4d::Identity();
  const Eigen::Matrix2d axial = B * B.transpose() + 0.1 * Eigen::Matrix2d::Identity();
  Mat6 local = Mat6::Zero();
  const int pi[] = {0, 1, 3, 4};
  const int ai[] = {2, 5};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      local(pi[i], pi[j]) = planar(i, j);
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      local(ai[i], ai[j]) = axial(i, j);
    }
  }
  m.cov = blocks(f0) * local * blocks(f0).transpose();
  return m;
}

InitialMoments rest_state(const SystemParams& p, const Vec3& n0)
{
  InitialMoments m;
  m.mean << p.a * n0, Vec3::Zero();
  m.cov = 0.25 * Mat6::Identity();
  return m;
}

}  // namespace

TEST(Factorized, ConstantPathReducesToStaticFlow)
{
  const auto p = params(30.0);
  const FieldPath path = FieldPath::constant(Vec3(1, 1, 1).normalized());
  const auto fact = build_factorized(p, path);
  EXPECT_LT((fact.R_part.S - Mat6::Identity()).norm(), 1e-14);
  EXPECT_LT((fact.M_part.S - Mat6::Identity()).norm(), 1e-14);
  EXPECT_LT(fact.M_part.b.norm(), 1e-14);
  EXPECT_EQ(fact.phi_P, 0.0);
  const auto direct = integrate_propagator(p, path, Frame::lab);
  const auto err = compare(direct, fact);
  EXPECT_LT(err.map_error, 1e-9);
  EXPECT_LT(err.offset_error, 1e-9);
  const auto [S, b] = oracle::static_monodromy(p.omega_c, p.omega, p.a, path.n(0.0), p.T);
  EXPECT_LT((fact.D_part.S - S).norm(), 1e-9);
  EXPECT_LT((fact.D_part.b - b).norm(), 1e-9);
}

TEST(Factorized, ZeroOffsetHasNoTranslation)
{
  const auto fact = build_factorized(params(50.0, 0.0), FieldPath::latitude(1.0, 1));
  EXPECT_EQ(fact.d.norm(), 0.0);
  EXPECT_EQ(fact.phi_P, 0.0);
  EXPECT_LT((fact.M_part.S - Mat6::Identity()).norm(), 1e-15);
  EXPECT_EQ(fact.M_part.b.norm(), 0.0);
}

TEST(Factorized, RotationIsTheHolonomyAboutN0)
{
  const FieldPath path = FieldPath::latitude(kPi / 4, 1);
  const auto fact = build_factorized(params(40.0), path);
  const Vec3 n0 = path.n(0.0);
  EXPECT_LT((fact.Q * n0 - n0).norm(), 1e-10);
  EXPECT_LT((fact.Q.transpose() * fact.Q - Mat3::Identity()).norm(), 1e-12);
  EXPECT_NEAR(fact.Q.determinant(), 1.0, 1e-12);
  // Rotation of e1(0) about n0, compared against the enclosed area.
  const Vec3 e1 = fact.initial_frame.col(0);
  const Vec3 q1 = fact.Q * e1;
  const double angle = std::atan2(n0.dot(e1.cross(q1)), e1.dot(q1));
  EXPECT_NEAR(angle, holonomy(path).angle_about_n0, 1e-10);
  EXPECT_NEAR(std::abs(angle), std::abs(wrap_angle(solid_angle(path))), 1e-9);
}

TEST(Factorized, FactorsAreSymplectic)
{
  const auto fact = build_factorized(
      params(60.0), FieldPath::slerp({Vec3(0, 0, 1), Vec3(1, 0, 0.5), Vec3(0, 1, 0.5)}, true));
  EXPECT_LT(fact.R_part.symplectic_defect(), 1e-12);
  EXPECT_LT(fact.M_part.symplectic_defect(), 1e-12);
  EXPECT_LT(fact.D_part.symplectic_defect(), 1e-9);
  EXPECT_LT(fact.total().symplectic_defect(), 1e-9);
  ASSERT_TRUE(fact.total().phase.has_value());
  EXPECT_DOUBLE_EQ(*fact.total().phase, fact.phi_P);
}

TEST(Factorized, SelfComparisonIsExact)
{
  const auto fact = build_factorized(params(20.0), FieldPath::latitude(0.9, 1));
  const auto err = compare(fact.total(), fact);
  EXPECT_EQ(err.map_error, 0.0);
  EXPECT_EQ(err.offset_error, 0.0);
}

TEST(Factorized, OrderOfFactorsMatters)
{
  const auto fact = build_factorized(params(20.0), FieldPath::latitude(kPi / 3, 1));
  const auto reordered = fact.D_part * fact.M_part * fact.R_part;
  EXPECT_GT(compare(reordered, fact).offset_error + compare(reordered, fact).map_error, 1e-3);
}

TEST(Factorized, MagneticShiftPreservesVelocity)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto p = params(10.0);
  const Vec3 n0 = Vec3(0.1, 0.4, 0.9).normalized();
  const Mat3 f0 = oracle::frame0(n0);
  const Vec3 d = f0.col(0) * 0.7 - f0.col(1) * 0.3;
  const auto shift = magnetic_shift(p, n0, d);
  for (int k = 0; k < 10; ++k) {
    Vec6 z;
    for (int i = 0; i < 6; ++i) {
      z(i) = u(rng);
    }
    const Vec6 w = shift.apply(z);
    EXPECT_LT((w.head<3>() - z.head<3>() - d).norm(), 1e-15);
    EXPECT_LT((velocity(p, n0, w) - velocity(p, n0, z)).norm(), 1e-14);
    EXPECT_NEAR(energy(p, n0, w), energy(p, n0, z), 1e-13);
  }
}

TEST(Factorized, ErrorDecreasesInverselyWithDuration)
{
  const FieldPath path = FieldPath::latitude(kPi / 3, 1);
  std::vector<double> err;
  for (double T : {100.0, 200.0, 400.0}) {
    const auto p = params(T);
    err.push_back(compare(integrate_propagator(p, path, Frame::lab), build_factorized(p, path))
                      .map_error);
  }
  EXPECT_GT(err[0], err[1]);
  EXPECT_GT(err[1], err[2]);
  EXPECT_NEAR(std::log2(err[0] / err[2]) / 2.0, 1.0, 0.2);
}

TEST(Factorized, PartialSweepMatchesFullAtEnd)
{
  const auto p = params(30.0);
  const FieldPath path = FieldPath::latitude(1.1, 1);
  const auto full = build_factorized(p, path);
  const auto half = build_factorized(p, path, 0.5);
  EXPECT_NEAR(half.s, 0.5, 0.0);
  EXPECT_LT((half.d - displacement(path, 0.5, p.a).end()).norm(), 1e-12);
  EXPECT_LT((full.d - displacement(path, 1.0, p.a).end()).norm(), 1e-12);
  EXPECT_NEAR(full.phi_P, phi_P(path, p.a, {p.kappa()}, 1.0), 1e-9);
}

TEST(BerryAlpha, VanishesWithoutDisplacement)
{
  const Vec3 n0 = FieldPath::latitude(1.0, 1).n(0.0);
  const auto p0 = params(50.0, 0.0);
  const auto r0 = berry_alpha(p0, FieldPath::latitude(1.0, 1), rest_state(p0, n0));
  EXPECT_NEAR(r0.final_alpha, 0.0, 1e-9);
  const auto p1 = params(50.0, 1.0);
  const FieldPath still = FieldPath::constant(Vec3::UnitZ());
  const auto r1 = berry_alpha(p1, still, rest_state(p1, Vec3::UnitZ()));
  EXPECT_NEAR(r1.final_alpha, 0.0, 1e-12);
}

TEST(BerryAlpha, FactorizedSourceIsStateIndependentAndEqualsPhiP)
{
  std::mt19937_64 rng(4);
  const FieldPath path = FieldPath::latitude(kPi / 3, 1);
  const auto p = params(200.0);
  const Vec3 n0 = path.n(0.0);
  std::vector<double> alphas;
  for (const Vec2& c : {Vec2(0, 0), Vec2(0.5, -0.2), Vec2(-1.0, 0.7)}) {
    const auto r = berry_alpha(p, path, product_state(p, n0, c, rng));
    alphas.push_back(r.final_alpha);
    EXPECT_NEAR(r.final_alpha, r.final_phi_P, 1e-8);
    ASSERT_EQ(r.s.size(), r.alpha.size());
    EXPECT_EQ(r.alpha.front(), 0.0);
  }
  EXPECT_NEAR(alphas[0], alphas[1], 1e-8);
  EXPECT_NEAR(alphas[0], alphas[2], 1e-8);
  EXPECT_NEAR(alphas[0], phi_P(path, p.a, {p.kappa()}, 1.0), 1e-8);
}

TEST(BerryAlpha, DirectSourceApproachesPhiP)
{
  const FieldPath path = FieldPath::latitude(kPi / 3, 1);
  std::vector<double> rel;
  AlphaOptions opt;
  opt.source = MomentSource::direct;
  for (double T : {100.0, 200.0}) {
    const auto p = params(T);
    const auto r = berry_alpha(p, path, rest_state(p, path.n(0.0)), opt);
    rel.push_back(std::abs(r.final_alpha - r.final_phi_P) / std::abs(r.final_phi_P));
  }
  EXPECT_LT(rel[1], rel[0]);
  EXPECT_LT(rel[1], 0.15);
}

TEST(BerryAlpha, RejectsInvalidMoments)
{
  const FieldPath path = FieldPath::latitude(1.0, 1);
  const auto p = params(50.0);
  const Vec3 n0 = path.n(0.0);
  auto m = rest_state(p, n0);
  m.mean.head<3>() += 0.1 * n0;
  EXPECT_THROW(berry_alpha(p, path, m), InputError);
  m = rest_state(p, n0);
  m.mean(3) += 0.2;
  EXPECT_THROW(berry_alpha(p, path, m), InputError);
  m = rest_state(p, n0);
  m.cov(0, 0) = -1.0;
  EXPECT_THROW(berry_alpha(p, path, m), InputError);
  m = rest_state(p, n0);
  m.cov(0, 1) = 0.1;
  EXPECT_THROW(berry_alpha(p, path, m), InputError);
  // Axial–planar correlation breaks the product structure.
  m = rest_state(p, n0);
  const Mat3 f0 = oracle::frame0(n0);
  Mat6 c = Mat6::Zero();
  c(0, 2) = c(2, 0) = 0.05;
  m.cov += blocks(f0) * c * blocks(f0).transpose();
  EXPECT_THROW(berry_alpha(p, path, m), InputError);
}
