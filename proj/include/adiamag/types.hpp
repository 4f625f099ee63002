#ifndef ADIAMAG_TYPES_HPP
#define ADIAMAG_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace adiamag
{

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Complex = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;

/// Invalid configuration or violated precondition. The CLI maps it to exit code 2.
class InputError : public std::invalid_argument
{
public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Integration or quadrature could not reach the requested accuracy. Exit code 3.
class NumericalError : public std::runtime_error
{
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Matrix of v ↦ a × v.
inline Mat3 cross_matrix(const Vec3& a)
{
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

/// Scalar 2D cross product a × b.
inline double cross2(const Vec2& a, const Vec2& b)
{
  return a.x() * b.y() - a.y() * b.x();
}

/// Canonical symplectic form on (x, P).
inline Mat6 symplectic_form()
{
  Mat6 j = Mat6::Zero();
  j.topRightCorner<3, 3>() = Mat3::Identity();
  j.bottomLeftCorner<3, 3>() = -Mat3::Identity();
  return j;
}

}  // namespace adiamag

#endif  // ADIAMAG_TYPES_HPP
