#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "adiamag/geometry.hpp"

namespace adiamag
{

namespace
{

// Pole that keeps the Dirac string (through -p) furthest from the loop.
Vec3 choose_pole(const FieldPath& path)
{
  constexpr int probes = 512;
  std::vector<Vec3> pts;
  pts.reserve(probes);
  Vec3 mean = Vec3::Zero();
  for (int k = 0; k < probes; ++k) {
    pts.push_back(path.n(k / static_cast<double>(probes)));
    mean += pts.back();
  }
  std::vector<Vec3> candidates{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                               -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  if (mean.norm() > 1e-6) {
    candidates.insert(candidates.begin(), mean.normalized());
  }
  Vec3 best = candidates.front();
  double best_margin = -1.0;
  for (const Vec3& p : candidates) {
    double margin = 2.0;
    for (const Vec3& n : pts) {
      margin = std::min(margin, 1.0 + p.dot(n));
    }
    // The mean direction wins ties so that small caps come out small.
    if (margin > best_margin + 1e-3) {
      best_margin = margin;
      best = p;
    }
  }
  return best;
}

}  // namespace

double solid_angle(const FieldPath& path, double tol)
{
  if (!path.closed()) {
    throw InputError("solid angle is defined only for closed paths");
  }
  const Vec3 pole = choose_pole(path);
  std::vector<double> edges{0.0};
  for (double b : path.knots()) {
    edges.push_back(b);
  }
  edges.push_back(1.0);

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  double omega = 0.0;
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double lo = edges[j];
    const double hi = edges[j + 1];
    auto integrand = [&](double s) {
      const Vec3 n = path.n(s);
      const Vec3 dn = path.dn_on(s, lo, hi);
      return pole.dot(n.cross(dn)) / (1.0 + pole.dot(n));
    };
    double error = 0.0;
    omega += Quadrature::integrate(integrand, lo, hi, 15, tol, &error);
    if (!(error <= std::max(1e3 * tol, 1e-10) * std::max(1.0, std::abs(omega)))) {
      throw NumericalError("solid angle quadrature did not converge");
    }
  }
  return omega;
}

AxisAngle axis_angle(const Mat3& rotation)
{
  const Eigen::AngleAxisd aa(rotation);
  AxisAngle out;
  out.angle = aa.angle();
  out.axis = aa.axis();
  if (out.angle < 0.0) {
    out.angle = -out.angle;
    out.axis = -out.axis;
  }
  return out;
}

Holonomy holonomy(const FieldPath& path, double tol)
{
  if (!path.closed()) {
    throw InputError("holonomy is defined only for closed paths");
  }
  Holonomy h;
  h.E = frame_matrix(path, 1.0, tol).E;
  const Mat3 f0 = initial_frame(path.n(0.0));
  // Axis in lab components: the rotation carrying each e_i(0) to e_i(1).
  h.axis_angle = axis_angle(f0 * h.E * f0.transpose());
  h.angle_about_n0 = std::atan2(h.E(1, 0), h.E(0, 0));
  h.off_axis = std::abs(h.E(2, 2) - 1.0);
  return h;
}

double wrap_angle(double angle)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(angle, two_pi);
  if (r <= -std::numbers::pi) {
    r += two_pi;
  } else if (r > std::numbers::pi) {
    r -= two_pi;
  }
  return r;
}

}  // namespace adiamag
