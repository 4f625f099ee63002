#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "adiamag/geometry.hpp"
#include "adiamag/ode.hpp"

namespace adiamag
{

namespace
{

// State layout: columns e1, e2, e3 (9 entries), then ∫σ1, ∫σ2.
constexpr std::size_t kStateSize = 11;

Mat3 frame_of(const ode::State& y)
{
  return Eigen::Map<const Mat3>(y.data());
}

ode::State initial_state(const FieldPath& path)
{
  ode::State y(kStateSize, 0.0);
  Eigen::Map<Mat3>(y.data()) = initial_frame(path.n(0.0));
  return y;
}

ode::PieceSystem transport_system(const FieldPath& path)
{
  return [path](double lo, double hi) -> ode::System {
    return [path, lo, hi](const ode::State& y, ode::State& dy, double s) {
      const Vec3 n = path.n(s);
      const Vec3 dn = path.dn_on(s, lo, hi);
      const Vec3 w = n.cross(dn);
      const Mat3 f = frame_of(y);
      Eigen::Map<Mat3> df(dy.data());
      for (int i = 0; i < 3; ++i) {
        df.col(i) = w.cross(f.col(i));
      }
      dy[9] = -f.col(0).dot(dn);
      dy[10] = -f.col(1).dot(dn);
    };
  };
}

// Nearest rotation (polar factor) to the integrated frame.
void reorthonormalize(ode::State& y)
{
  Eigen::Map<Mat3> f(y.data());
  const Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f = svd.matrixU() * svd.matrixV().transpose();
}

ode::Options transport_options(double tol)
{
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw InputError("transport tolerance must be positive");
  }
  ode::Options options;
  options.rtol = tol;
  options.atol = tol;
  options.method = ode::Method::fehlberg78;
  return options;
}

std::vector<double> piece_edges(const FieldPath& path, double s_end)
{
  std::vector<double> edges{0.0};
  for (double b : path.breakpoints()) {
    if (b > 0.0 && b < s_end) {
      edges.push_back(b);
    }
  }
  edges.push_back(s_end);
  return edges;
}

void check_parameter(double s, const char* what)
{
  if (!(s >= 0.0 && s <= 1.0)) {
    throw InputError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

Mat3 TransportedFrame::matrix() const
{
  Mat3 m;
  m << e1, e2, e3;
  return m;
}

Mat3 initial_frame(const Vec3& n0)
{
  const Vec3 n = n0.normalized();
  const Vec3 seed = std::abs(n.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
  const Vec3 e1 = (seed - n.dot(seed) * n).normalized();
  const Vec3 e2 = n.cross(e1);
  Mat3 f;
  f << e1, e2, n;
  return f;
}

std::vector<TransportedFrame> transport_frame(const FieldPath& path,
                                              std::span<const double> s_grid, double tol)
{
  for (double s : s_grid) {
    check_parameter(s, "transport grid point");
  }
  if (!std::is_sorted(s_grid.begin(), s_grid.end())) {
    throw InputError("transport grid must be ascending");
  }
  std::vector<TransportedFrame> frames;
  frames.reserve(s_grid.size());
  ode::State y = initial_state(path);
  const auto breaks = path.breakpoints();
  ode::integrate_pieces(
      transport_system(path), y, 0.0, s_grid, breaks, transport_options(tol),
      [&frames](double s, const ode::State& state) {
        const Mat3 f = frame_of(state);
        frames.push_back({s, f.col(0), f.col(1), f.col(2)});
      },
      reorthonormalize);
  return frames;
}

FrameMatrix frame_matrix(const FieldPath& path, double s, double tol)
{
  const double grid[] = {s};
  const auto frames = transport_frame(path, grid, tol);
  return {initial_frame(path.n(0.0)).transpose() * frames.front().matrix()};
}

SigmaPair sigma_at(const FieldPath& path, const TransportedFrame& frame, Side side)
{
  const Vec3 n = path.n(frame.s);
  const Vec3 dn = path.dn(frame.s, side);
  const Vec3 w = n.cross(dn);
  SigmaPair out;
  out.rate = {w.cross(frame.e1).dot(n), w.cross(frame.e2).dot(n)};
  out.projection = {-frame.e1.dot(dn), -frame.e2.dot(dn)};
  return out;
}

Vec2 sigma(const FieldPath& path, double s, double tol)
{
  const double grid[] = {s};
  const auto frames = transport_frame(path, grid, tol);
  return sigma_at(path, frames.front(), s >= 1.0 ? Side::left : Side::right).rate;
}

PathSamples sample_path(const FieldPath& path, double s_end, std::size_t intervals, double tol)
{
  check_parameter(s_end, "sample end");
  if (intervals < 2) {
    throw InputError("sample_path needs at least two intervals per unit s");
  }
  const auto options = transport_options(tol);
  const auto edges = piece_edges(path, s_end);
  const auto make_system = transport_system(path);

  PathSamples out;
  ode::State y = initial_state(path);

  auto record = [&](double s, const ode::State& state, Side side) {
    const Mat3 f = frame_of(state);
    const Vec3 dn = path.dn(s, side);
    out.s.push_back(s);
    out.frame.push_back(f);
    out.n.push_back(path.n(s));
    out.dn.push_back(dn);
    out.sigma.emplace_back(-f.col(0).dot(dn), -f.col(1).dot(dn));
    out.sigma_integral.emplace_back(state[9], state[10]);
  };

  if (s_end == 0.0) {
    out.piece_begin.push_back(0);
    record(0.0, y, Side::right);
    out.piece_begin.push_back(out.size());
    return out;
  }

  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double lo = edges[j];
    const double hi = edges[j + 1];
    auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(intervals) * (hi - lo)));
    m = std::max<std::size_t>(m + (m % 2), 2);

    std::vector<double> grid(m);
    for (std::size_t k = 1; k <= m; ++k) {
      grid[k - 1] = k == m ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m);
    }
    out.piece_begin.push_back(out.size());
    record(lo, y, Side::right);
    ode::integrate(make_system(lo, hi), y, lo, grid, options,
                   [&](double s, const ode::State& state) {
                     record(s, state, s >= hi ? Side::left : Side::right);
                   },
                   reorthonormalize);
  }
  out.piece_begin.push_back(out.size());
  return out;
}

Vec2 DisplacementCurve::at(double s_query) const
{
  if (s.size() == 1 || s_query <= s.front()) {
    return d.front();
  }
  if (s_query >= s.back()) {
    return d.back();
  }
  auto it = std::upper_bound(s.begin(), s.end(), s_query);
  const auto k = static_cast<std::size_t>(std::distance(s.begin(), it)) - 1;
  const double h = s[k + 1] - s[k];
  const double t = (s_query - s[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * d[k] + (t3 - 2 * t2 + t) * h * d_prime[k] +
         (-2 * t3 + 3 * t2) * d[k + 1] + (t3 - t2) * h * d_prime[k + 1];
}

DisplacementCurve displacement(const FieldPath& path, double s, double a, double tol,
                               std::size_t intervals)
{
  if (!std::isfinite(a)) {
    throw InputError("offset a must be finite");
  }
  const PathSamples samples = sample_path(path, s, intervals, tol);
  DisplacementCurve c;
  c.s = samples.s;
  c.d.reserve(samples.size());
  c.d_prime.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    c.d.push_back(0.5 * a * samples.sigma_integral[k]);
    c.d_prime.push_back(0.5 * a * samples.sigma[k]);
  }
  return c;
}

Vec3 displacement_lab(const Mat3& initial_frame, const Vec2& d)
{
  return initial_frame.col(0) * d.x() + initial_frame.col(1) * d.y();
}

}  // namespace adiamag
