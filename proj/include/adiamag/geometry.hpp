#ifndef ADIAMAG_GEOMETRY_HPP
#define ADIAMAG_GEOMETRY_HPP

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adiamag/types.hpp"

namespace adiamag
{

enum class PathKind
{
  constant,
  latitude,
  slerp,
  table,
  parametric,
};

/// Which one-sided limit to take at a breakpoint.
enum class Side
{
  left,
  right,
};

namespace detail
{
struct PathImpl;
}

/// A smooth (or piecewise-smooth) path n(s) on the unit sphere, s in [0, 1].
///
/// Derivatives are with respect to s. At declared breakpoints the derivative
/// may jump; `side` selects the one-sided limit there. Away from breakpoints
/// `side` is ignored.
class FieldPath
{
public:
  static FieldPath constant(const Vec3& n);

  /// n(s) at colatitude theta0, azimuth phi0 + 2π·turns·s. turns = 0 gives a
  /// constant path; negative turns reverse the orientation.
  static FieldPath latitude(double theta0, int turns, double phi0 = 0.0);

  /// Great-circle arcs between consecutive waypoints, each traversed at
  /// constant speed over an equal share of [0, 1]. With `closed`, the first
  /// waypoint is appended when the last one differs from it.
  static FieldPath slerp(std::vector<Vec3> waypoints, bool closed);

  /// Interpolated table of (s, n) rows; s must run from 0 to 1 strictly
  /// increasing. Interpolation is component-wise modified Akima followed by
  /// renormalization.
  static FieldPath table(std::vector<double> s, std::vector<Vec3> n);

  /// Reads a headerless or headed CSV with columns s,nx,ny,nz.
  static FieldPath table_from_csv(const std::string& file);

  /// User-supplied analytic path. n is renormalized on evaluation; it must be
  /// unit length to 1e-9 on a probe grid or InputError is thrown.
  static FieldPath parametric(std::function<Vec3(double)> n,
                              std::function<Vec3(double)> dn,
                              std::function<Vec3(double)> d2n);

  PathKind kind() const;

  Vec3 n(double s) const;
  Vec3 dn(double s, Side side = Side::right) const;
  Vec3 d2n(double s, Side side = Side::right) const;

  /// Derivatives as seen from inside the piece [lo, hi]: at s = hi the left
  /// limit is used, elsewhere the right limit.
  Vec3 dn_on(double s, double lo, double hi) const;
  Vec3 d2n_on(double s, double lo, double hi) const;

  /// Interior breakpoints in (0, 1), ascending.
  std::vector<double> breakpoints() const;

  /// Interior points where some derivative may jump: the breakpoints plus,
  /// for tables, every interpolation knot. Quadrature splits there.
  std::vector<double> knots() const;

  /// True iff |n(1) - n(0)| < 1e-9.
  bool closed() const;

  /// The same curve traversed backwards: n(1 - s).
  FieldPath reversed() const;

private:
  FieldPath(std::shared_ptr<const detail::PathImpl> impl, bool reversed);

  std::shared_ptr<const detail::PathImpl> impl_;
  bool reversed_ = false;
};

/// Closure tolerance for classifying a path as a loop.
inline constexpr double kClosureTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Parallel transport

/// Orthonormal triad at parameter s. e3 follows n(s); e1 and e2 are parallel
/// transported along the path.
struct TransportedFrame
{
  double s = 0.0;
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 e3 = Vec3::UnitZ();

  /// Columns e1, e2, e3.
  Mat3 matrix() const;
};

/// E_ij = e_i(0) · e_j(s).
struct FrameMatrix
{
  Mat3 E = Mat3::Identity();
};

/// Right-handed triad with e3 = n0. e1 is x̂ Gram-Schmidt'ed against n0
/// (ŷ when |n0·x̂| > 0.9), e2 = n0 × e1. Returned as columns.
Mat3 initial_frame(const Vec3& n0);

/// Integrates de_i/ds = (n × dn/ds) × e_i from the initial frame through the
/// ascending grid, re-orthonormalizing after every step. `tol` is the
/// relative and absolute local error tolerance.
std::vector<TransportedFrame> transport_frame(const FieldPath& path,
                                              std::span<const double> s_grid,
                                              double tol = 1e-12);

FrameMatrix frame_matrix(const FieldPath& path, double s, double tol = 1e-12);

/// σ_μ = (de_μ/ds) · n at s, with de_μ/ds taken from the transport equation.
Vec2 sigma(const FieldPath& path, double s, double tol = 1e-12);

/// σ_μ from an already transported frame, in both algebraic forms: `rate` is
/// (de_μ/ds)·n, `projection` is -e_μ·(dn/ds).
struct SigmaPair
{
  Vec2 rate;
  Vec2 projection;
};
SigmaPair sigma_at(const FieldPath& path, const TransportedFrame& frame,
                   Side side = Side::right);

/// Dense samples of the transported geometry on [0, s_end]. Each smooth piece
/// of the path gets its own uniform sub-grid with an even number of
/// intervals; piece ends appear twice, once per side, so one-sided σ values
/// are kept apart.
struct PathSamples
{
  std::vector<double> s;
  std::vector<Mat3> frame;  // columns e1, e2, e3
  std::vector<Vec3> n;
  std::vector<Vec3> dn;     // one-sided within the piece
  std::vector<Vec2> sigma;
  std::vector<Vec2> sigma_integral;  // ∫_0^s σ_μ ds', integrated with the frame
  std::vector<std::size_t> piece_begin;  // first node of each piece; sentinel at end

  std::size_t size() const { return s.size(); }
};

/// `intervals` is the target number of sub-intervals per unit of s.
PathSamples sample_path(const FieldPath& path, double s_end, std::size_t intervals = 4096,
                        double tol = 1e-12);

// ---------------------------------------------------------------------------
// Displacement

/// The adiabatic orbit displacement d(s) = -(a/2) ∫ e_μ · dn, given as
/// components on (e1(0), e2(0)), together with its sampled history.
struct DisplacementCurve
{
  std::vector<double> s;
  std::vector<Vec2> d;
  std::vector<Vec2> d_prime;  // dd/ds = (a/2) σ

  Vec2 end() const { return d.back(); }

  /// Cubic Hermite interpolation of the history.
  Vec2 at(double s_query) const;
};

DisplacementCurve displacement(const FieldPath& path, double s, double a,
                               double tol = 1e-12, std::size_t intervals = 4096);

/// The displacement as a 3-vector in lab components, given the initial frame.
Vec3 displacement_lab(const Mat3& initial_frame, const Vec2& d);

// ---------------------------------------------------------------------------
// Loops

/// Oriented spherical area enclosed by a closed path, in steradians.
///
/// Evaluated as the flux of a monopole vector potential with its string
/// through -p, where the pole p is chosen to keep the loop far from -p.
/// Orientation follows the right-hand rule around the enclosed region;
/// the 4π ambiguity of "enclosed" is resolved by the pole choice.
/// Throws InputError for open paths.
double solid_angle(const FieldPath& path, double tol = 1e-12);

struct AxisAngle
{
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;  // in [0, π]
};

AxisAngle axis_angle(const Mat3& rotation);

/// Net rotation of the transported frame after a closed loop.
struct Holonomy
{
  Mat3 E = Mat3::Identity();
  AxisAngle axis_angle;
  /// Signed rotation of (e1, e2) about n(0), atan2(E21, E11) in (-π, π].
  double angle_about_n0 = 0.0;
  /// Distance of E from a rotation about n(0): |E33 - 1|.
  double off_axis = 0.0;
};

Holonomy holonomy(const FieldPath& path, double tol = 1e-12);

/// Wraps an angle to (-π, π].
double wrap_angle(double angle);

}  // namespace adiamag

#endif  // ADIAMAG_GEOMETRY_HPP
