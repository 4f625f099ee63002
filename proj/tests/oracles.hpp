// Independent reference computations used only by the tests. None of these
// call into the library's integrators or quadrature.
#ifndef ADIAMAG_TESTS_ORACLES_HPP
#define ADIAMAG_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle
{

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline Mat3 frame0(const Vec3& n0)
{
  const Vec3 seed = std::abs(n0.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
  const Vec3 e1 = (seed - n0.dot(seed) * n0).normalized();
  Mat3 f;
  f << e1, n0.cross(e1), n0;
  return f;
}

/// Fixed-step classical RK4 for the transported frame and ∫e_μ·dn over
/// [0, 1] with `steps` steps. Returns (-∫e1·dn, -∫e2·dn), i.e. ∫σ.
inline Vec2 sigma_integral_rk4(const std::function<Vec3(double)>& n,
                               const std::function<Vec3(double)>& dn, int steps)
{
  using State = Eigen::Matrix<double, 11, 1>;
  auto rhs = [&](double s, const State& y) {
    State dy;
    const Vec3 w = n(s).cross(dn(s));
    for (int i = 0; i < 3; ++i) {
      const Vec3 e = y.segment<3>(3 * i);
      dy.segment<3>(3 * i) = w.cross(e);
    }
    dy(9) = -y.segment<3>(0).dot(dn(s));
    dy(10) = -y.segment<3>(3).dot(dn(s));
    return dy;
  };
  State y = State::Zero();
  const Mat3 f = frame0(n(0.0));
  for (int i = 0; i < 3; ++i) {
    y.segment<3>(3 * i) = f.col(i);
  }
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = k * h;
    const State k1 = rhs(s, y);
    const State k2 = rhs(s + h / 2, y + h / 2 * k1);
    const State k3 = rhs(s + h / 2, y + h / 2 * k2);
    const State k4 = rhs(s + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return {y(9), y(10)};
}

/// Richardson extrapolation of the RK4 result (error ∝ h⁴).
inline Vec2 sigma_integral_richardson(const std::function<Vec3(double)>& n,
                                      const std::function<Vec3(double)>& dn, int steps)
{
  const Vec2 coarse = sigma_integral_rk4(n, dn, steps);
  const Vec2 fine = sigma_integral_rk4(n, dn, 2 * steps);
  return fine + (fine - coarse) / 15.0;
}

/// Signed area of a polygon (shoelace); the polygon is closed implicitly.
inline double shoelace(const std::vector<Vec2>& v)
{
  double a = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec2& p = v[k];
    const Vec2& q = v[(k + 1) % v.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * a;
}

/// Closed-form motion in a static field along n: cyclotron rotation of the
/// planar velocity and harmonic axial motion. z = (x, P).
inline Vec6 static_motion(double omega_c, double omega, double a, const Vec3& n, const Vec6& z0,
                          double t)
{
  const Vec3 x0 = z0.head<3>();
  const Vec3 v0 = z0.tail<3>() - 0.5 * omega_c * n.cross(x0);
  const Vec3 vp = v0 - n.dot(v0) * n;
  const Vec3 xp = x0 - n.dot(x0) * n;
  const double c = std::cos(omega_c * t);
  const double s = std::sin(omega_c * t);
  const Vec3 v_planar = c * vp - s * n.cross(vp);
  const Vec3 x_planar = xp + (s * vp + (c - 1.0) * n.cross(vp)) / omega_c;
  const double u0 = n.dot(x0) - a;
  const double w0 = n.dot(v0);
  const double u = u0 * std::cos(omega * t) + w0 / omega * std::sin(omega * t);
  const double w = -u0 * omega * std::sin(omega * t) + w0 * std::cos(omega * t);
  const Vec3 x = x_planar + (a + u) * n;
  const Vec3 v = v_planar + w * n;
  Vec6 z;
  z << x, v + 0.5 * omega_c * n.cross(x);
  return z;
}

/// Static monodromy (S, b) assembled column by column from static_motion.
inline std::pair<Mat6, Vec6> static_monodromy(double omega_c, double omega, double a,
                                              const Vec3& n, double t)
{
  const Vec6 b = static_motion(omega_c, omega, a, n, Vec6::Zero(), t);
  Mat6 S;
  for (int j = 0; j < 6; ++j) {
    S.col(j) = static_motion(omega_c, omega, a, n, Vec6::Unit(j), t) - b;
  }
  return {S, b};
}

/// Midpoint-rule integral of f over the cube [-L, L]³ around `center`.
template <class F>
auto grid_integral(F f, const Vec3& center, double L, int m)
{
  const double h = 2.0 * L / m;
  decltype(f(center)) acc{};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        const Vec3 x = center + Vec3(-L + (i + 0.5) * h, -L + (j + 0.5) * h, -L + (k + 0.5) * h);
        acc += f(x);
      }
    }
  }
  return acc * (h * h * h);
}

}  // namespace oracle

#endif  // ADIAMAG_TESTS_ORACLES_HPP
