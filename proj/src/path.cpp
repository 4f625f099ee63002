#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/makima.hpp>

#include "adiamag/geometry.hpp"

namespace adiamag
{

namespace detail
{

struct PathImpl
{
  virtual ~PathImpl() = default;
  virtual PathKind kind() const = 0;
  virtual Vec3 n(double s) const = 0;
  virtual Vec3 dn(double s, Side side) const = 0;
  virtual Vec3 d2n(double s, Side side) const = 0;
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual std::vector<double> knots() const { return breakpoints(); }
};

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class ConstantPath final : public PathImpl
{
public:
  explicit ConstantPath(const Vec3& n) : n_(n.normalized()) {}
  PathKind kind() const override { return PathKind::constant; }
  Vec3 n(double) const override { return n_; }
  Vec3 dn(double, Side) const override { return Vec3::Zero(); }
  Vec3 d2n(double, Side) const override { return Vec3::Zero(); }

private:
  Vec3 n_;
};

class LatitudePath final : public PathImpl
{
public:
  LatitudePath(double theta0, int turns, double phi0)
    : sin_(std::sin(theta0)), cos_(std::cos(theta0)), rate_(kTwoPi * turns), phi0_(phi0)
  {
  }
  PathKind kind() const override { return PathKind::latitude; }
  Vec3 n(double s) const override
  {
    const double phi = phi0_ + rate_ * s;
    return {sin_ * std::cos(phi), sin_ * std::sin(phi), cos_};
  }
  Vec3 dn(double s, Side) const override
  {
    const double phi = phi0_ + rate_ * s;
    return {-rate_ * sin_ * std::sin(phi), rate_ * sin_ * std::cos(phi), 0.0};
  }
  Vec3 d2n(double s, Side) const override
  {
    const double phi = phi0_ + rate_ * s;
    const double r2 = rate_ * rate_;
    return {-r2 * sin_ * std::cos(phi), -r2 * sin_ * std::sin(phi), 0.0};
  }

private:
  double sin_, cos_, rate_, phi0_;
};

class SlerpPath final : public PathImpl
{
public:
  explicit SlerpPath(std::vector<Vec3> waypoints) : points_(std::move(waypoints))
  {
    const std::size_t segments = points_.size() - 1;
    for (std::size_t k = 0; k < segments; ++k) {
      const Vec3& a = points_[k];
      const Vec3& b = points_[k + 1];
      const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
      if (angle > std::numbers::pi - 1e-9) {
        throw InputError("slerp waypoints " + std::to_string(k) + " and " +
                         std::to_string(k + 1) + " are antipodal");
      }
      Vec3 tangent = b - a.dot(b) * a;
      const double tn = tangent.norm();
      tangent = tn > 0.0 ? Vec3(tangent / tn) : Vec3::Zero();
      angles_.push_back(angle);
      tangents_.push_back(tangent);
    }
  }
  PathKind kind() const override { return PathKind::slerp; }

  Vec3 n(double s) const override
  {
    const auto [k, u] = locate(s, Side::right);
    const double phi = u * angles_[k];
    return std::cos(phi) * points_[k] + std::sin(phi) * tangents_[k];
  }
  Vec3 dn(double s, Side side) const override
  {
    const auto [k, u] = locate(s, side);
    const double phi = u * angles_[k];
    const double rate = angles_[k] * static_cast<double>(angles_.size());
    return rate * (-std::sin(phi) * points_[k] + std::cos(phi) * tangents_[k]);
  }
  Vec3 d2n(double s, Side side) const override
  {
    const auto [k, u] = locate(s, side);
    const double phi = u * angles_[k];
    const double rate = angles_[k] * static_cast<double>(angles_.size());
    return -rate * rate * (std::cos(phi) * points_[k] + std::sin(phi) * tangents_[k]);
  }
  std::vector<double> breakpoints() const override
  {
    std::vector<double> b;
    const std::size_t segments = angles_.size();
    for (std::size_t k = 1; k < segments; ++k) {
      b.push_back(static_cast<double>(k) / static_cast<double>(segments));
    }
    return b;
  }

private:
  std::pair<std::size_t, double> locate(double s, Side side) const
  {
    const std::size_t segments = angles_.size();
    const double x = std::clamp(s, 0.0, 1.0) * static_cast<double>(segments);
    auto k = static_cast<std::size_t>(std::floor(x));
    if (k >= segments) {
      k = segments - 1;
    } else if (side == Side::left && k > 0 && x == static_cast<double>(k)) {
      --k;
    }
    return {k, x - static_cast<double>(k)};
  }

  std::vector<Vec3> points_;
  std::vector<double> angles_;
  std::vector<Vec3> tangents_;
};

class TablePath final : public PathImpl
{
  using Makima = boost::math::interpolators::makima<std::vector<double>>;

public:
  TablePath(std::vector<double> s, const std::vector<Vec3>& n)
    : knots_(s.begin() + 1, s.end() - 1)
  {
    for (int c = 0; c < 3; ++c) {
      std::vector<double> xs = s;
      std::vector<double> ys;
      ys.reserve(n.size());
      for (const auto& v : n) {
        ys.push_back(v(c));
      }
      splines_.emplace_back(std::move(xs), std::move(ys));
    }
  }
  PathKind kind() const override { return PathKind::table; }
  std::vector<double> knots() const override { return knots_; }

  Vec3 n(double s) const override { return raw(s).normalized(); }

  Vec3 dn(double s, Side) const override
  {
    const Vec3 v = raw(s);
    const double len = v.norm();
    const Vec3 u = v / len;
    const Vec3 dv = raw_prime(s);
    return (dv - u * u.dot(dv)) / len;
  }

  // The interpolant is only C1; the curvature comes from centered differences.
  Vec3 d2n(double s, Side side) const override
  {
    constexpr double h = 1e-4;
    const double lo = std::max(0.0, s - h);
    const double hi = std::min(1.0, s + h);
    return (dn(hi, side) - dn(lo, side)) / (hi - lo);
  }

private:
  Vec3 raw(double s) const
  {
    s = std::clamp(s, 0.0, 1.0);
    return {splines_[0](s), splines_[1](s), splines_[2](s)};
  }
  Vec3 raw_prime(double s) const
  {
    s = std::clamp(s, 0.0, 1.0);
    return {splines_[0].prime(s), splines_[1].prime(s), splines_[2].prime(s)};
  }

  std::vector<double> knots_;
  std::vector<Makima> splines_;
};

class ParametricPath final : public PathImpl
{
public:
  ParametricPath(std::function<Vec3(double)> n, std::function<Vec3(double)> dn,
                 std::function<Vec3(double)> d2n)
    : n_(std::move(n)), dn_(std::move(dn)), d2n_(std::move(d2n))
  {
  }
  PathKind kind() const override { return PathKind::parametric; }
  Vec3 n(double s) const override { return n_(s).normalized(); }
  Vec3 dn(double s, Side) const override { return dn_(s); }
  Vec3 d2n(double s, Side) const override { return d2n_(s); }

private:
  std::function<Vec3(double)> n_, dn_, d2n_;
};

Vec3 checked_unit(const Vec3& v, const std::string& what)
{
  const double len = v.norm();
  if (!std::isfinite(len) || len < 1e-12) {
    throw InputError(what + " has zero or non-finite length");
  }
  return v / len;
}

}  // namespace
}  // namespace detail

FieldPath::FieldPath(std::shared_ptr<const detail::PathImpl> impl, bool reversed)
  : impl_(std::move(impl)), reversed_(reversed)
{
}

FieldPath FieldPath::constant(const Vec3& n)
{
  return {std::make_shared<detail::ConstantPath>(detail::checked_unit(n, "constant path direction")),
          false};
}

FieldPath FieldPath::latitude(double theta0, int turns, double phi0)
{
  if (!std::isfinite(theta0) || !std::isfinite(phi0)) {
    throw InputError("latitude path angles must be finite");
  }
  return {std::make_shared<detail::LatitudePath>(theta0, turns, phi0), false};
}

FieldPath FieldPath::slerp(std::vector<Vec3> waypoints, bool closed)
{
  if (waypoints.size() < 2) {
    throw InputError("slerp path needs at least two waypoints");
  }
  for (std::size_t k = 0; k < waypoints.size(); ++k) {
    waypoints[k] = detail::checked_unit(waypoints[k], "waypoint " + std::to_string(k));
  }
  if (closed && (waypoints.back() - waypoints.front()).norm() >= kClosureTolerance) {
    waypoints.push_back(waypoints.front());
  }
  return {std::make_shared<detail::SlerpPath>(std::move(waypoints)), false};
}

FieldPath FieldPath::table(std::vector<double> s, std::vector<Vec3> n)
{
  if (s.size() != n.size()) {
    throw InputError("path table: column lengths differ");
  }
  if (s.size() < 4) {
    throw InputError("path table needs at least four rows");
  }
  if (std::abs(s.front()) > 1e-12 || std::abs(s.back() - 1.0) > 1e-12) {
    throw InputError("path table must span s = 0 to s = 1");
  }
  s.front() = 0.0;
  s.back() = 1.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k] > s[k - 1])) {
      throw InputError("path table s column must be strictly increasing");
    }
  }
  for (std::size_t k = 0; k < n.size(); ++k) {
    n[k] = detail::checked_unit(n[k], "table row " + std::to_string(k));
  }
  return {std::make_shared<detail::TablePath>(std::move(s), n), false};
}

FieldPath FieldPath::table_from_csv(const std::string& file)
{
  std::ifstream in(file);
  if (!in) {
    throw InputError("cannot open path table '" + file + "'");
  }
  std::vector<double> s;
  std::vector<Vec3> n;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double v[4];
    if (!(fields >> v[0] >> v[1] >> v[2] >> v[3])) {
      if (s.empty()) {
        continue;  // header
      }
      throw InputError(file + ":" + std::to_string(line_no) + ": expected s,nx,ny,nz");
    }
    s.push_back(v[0]);
    n.emplace_back(v[1], v[2], v[3]);
  }
  return table(std::move(s), std::move(n));
}

FieldPath FieldPath::parametric(std::function<Vec3(double)> n, std::function<Vec3(double)> dn,
                                std::function<Vec3(double)> d2n)
{
  if (!n || !dn || !d2n) {
    throw InputError("parametric path needs n, dn and d2n");
  }
  for (int k = 0; k <= 256; ++k) {
    const double s = k / 256.0;
    const double len = n(s).norm();
    if (!(std::abs(len - 1.0) < 1e-9)) {
      throw InputError("parametric path: non-unit n at s = " + std::to_string(s));
    }
    if (!dn(s).allFinite()) {
      throw InputError("parametric path: non-finite dn/ds at s = " + std::to_string(s));
    }
  }
  return {std::make_shared<detail::ParametricPath>(std::move(n), std::move(dn), std::move(d2n)),
          false};
}

PathKind FieldPath::kind() const { return impl_->kind(); }

namespace
{
Side flip(Side side) { return side == Side::left ? Side::right : Side::left; }
}  // namespace

Vec3 FieldPath::n(double s) const
{
  return reversed_ ? impl_->n(1.0 - s) : impl_->n(s);
}

Vec3 FieldPath::dn(double s, Side side) const
{
  return reversed_ ? Vec3(-impl_->dn(1.0 - s, flip(side))) : impl_->dn(s, side);
}

Vec3 FieldPath::d2n(double s, Side side) const
{
  return reversed_ ? impl_->d2n(1.0 - s, flip(side)) : impl_->d2n(s, side);
}

Vec3 FieldPath::dn_on(double s, double, double hi) const
{
  return dn(s, s >= hi ? Side::left : Side::right);
}

Vec3 FieldPath::d2n_on(double s, double, double hi) const
{
  return d2n(s, s >= hi ? Side::left : Side::right);
}

std::vector<double> FieldPath::breakpoints() const
{
  auto b = impl_->breakpoints();
  if (reversed_) {
    for (double& x : b) {
      x = 1.0 - x;
    }
    std::reverse(b.begin(), b.end());
  }
  return b;
}

std::vector<double> FieldPath::knots() const
{
  auto k = impl_->knots();
  if (reversed_) {
    for (double& x : k) {
      x = 1.0 - x;
    }
    std::reverse(k.begin(), k.end());
  }
  return k;
}

bool FieldPath::closed() const
{
  return (n(1.0) - n(0.0)).norm() < kClosureTolerance;
}

FieldPath FieldPath::reversed() const
{
  return {impl_, !reversed_};
}

}  // namespace adiamag
