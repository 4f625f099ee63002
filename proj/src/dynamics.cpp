#include "adiamag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "adiamag/ode.hpp"

namespace adiamag
{

namespace
{

using Mat67 = Eigen::Matrix<double, 6, 7>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

ode::Options make_options(const PropagatorOptions& o)
{
  if (!(o.tol > 0.0) || !std::isfinite(o.tol)) {
    throw InputError("integration tolerance must be positive");
  }
  ode::Options options;
  options.rtol = o.tol;
  options.atol = o.tol;
  options.max_steps = o.max_steps;
  options.method = ode::Method::fehlberg78;
  return options;
}

std::vector<double> scaled_breakpoints(const FieldPath& path, double T)
{
  auto b = path.breakpoints();
  for (double& x : b) {
    x *= T;
  }
  return b;
}

// Path parameter and derivative side for time t inside the piece [lo, hi].
// t/T can land an ulp on the wrong side of a breakpoint, so the piece ends
// are snapped to the exact breakpoint values first.
struct PieceClock
{
  double T;
  double s_lo;
  double s_hi;

  PieceClock(const FieldPath& path, double T_, double lo, double hi) : T(T_)
  {
    auto snap = [&path](double s) {
      for (double b : path.breakpoints()) {
        if (std::abs(s - b) <= 1e-12) {
          return b;
        }
      }
      return std::clamp(s, 0.0, 1.0);
    };
    s_lo = snap(lo / T);
    s_hi = snap(hi / T);
  }

  std::pair<double, Side> at(double t) const
  {
    const double s = std::clamp(t / T, s_lo, s_hi);
    return {s, s >= s_hi ? Side::left : Side::right};
  }
};

void reorthonormalize(double* data)
{
  Eigen::Map<Mat3> f(data);
  const Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f = svd.matrixU() * svd.matrixV().transpose();
}

// d/dt of the transported frame at s = t/T.
Mat3 frame_derivative(const SystemParams& p, const Vec3& n, const Vec3& dn, const Mat3& f)
{
  const Vec3 w = p.epsilon() * n.cross(dn);
  return cross_matrix(w) * f;
}

Mat6 to_rotating_matrix(const SystemParams& p, const Mat3& f, const Mat3& fdot)
{
  // x̃ = Fᵀx, dx̃/dt = Fᵀ(ẋ - Ḟx̃), ẋ = P - (ω_c/2) n×x.
  const Mat3 half_b = 0.5 * p.omega_c * cross_matrix(f.col(2));
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = f.transpose();
  m.bottomLeftCorner<3, 3>() = f.transpose() * (-half_b - fdot * f.transpose());
  m.bottomRightCorner<3, 3>() = f.transpose();
  return m;
}

Mat6 from_rotating_matrix(const SystemParams& p, const Mat3& f, const Mat3& fdot)
{
  const Mat3 half_b = 0.5 * p.omega_c * cross_matrix(f.col(2));
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = f;
  m.bottomLeftCorner<3, 3>() = fdot + half_b * f;
  m.bottomRightCorner<3, 3>() = f;
  return m;
}

void check_time(double t_end)
{
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw InputError("integration end time must be finite and non-negative");
  }
}

AffinePropagator lab_propagator(const SystemParams& p, const FieldPath& path,
                                std::span<const double> times, const PropagatorOptions& o,
                                std::vector<AffinePropagator>* history)
{
  ode::State y(42, 0.0);
  Eigen::Map<Mat67> phi(y.data());
  phi.leftCols<6>() = Mat6::Identity();

  // n is continuous across breakpoints, so every piece shares one system.
  auto make = [&p, &path](double, double) -> ode::System {
    return [&p, &path](const ode::State& yy, ode::State& dy, double t) {
      const Mat7 g = lab_generator(p, path.n(t / p.T));
      Eigen::Map<const Mat67> ph(yy.data());
      Eigen::Map<Mat67> dph(dy.data());
      dph = g.topLeftCorner<6, 6>() * ph;
      dph.col(6) += g.block<6, 1>(0, 6);
    };
  };

  AffinePropagator last;
  const auto breaks = scaled_breakpoints(path, p.T);
  ode::integrate_pieces(make, y, 0.0, times, breaks, make_options(o),
                        [&](double, const ode::State& state) {
                          Eigen::Map<const Mat67> ph(state.data());
                          last.S = ph.leftCols<6>();
                          last.b = ph.col(6);
                          if (history) {
                            history->push_back(last);
                          }
                        });
  return last;
}

AffinePropagator rotating_propagator(const SystemParams& p, const FieldPath& path, double t_end,
                                     const PropagatorOptions& o)
{
  // Layout: 6×7 block of (x̃, dx̃/dt) columns, then the frame (9).
  ode::State y(51, 0.0);
  const Mat3 f0 = initial_frame(path.n(0.0));
  const Mat3 f0dot = frame_derivative(p, path.n(0.0), path.dn(0.0), f0);
  const Mat6 c0 = to_rotating_matrix(p, f0, f0dot);
  Eigen::Map<Mat67>(y.data()).leftCols<6>() = c0;
  Eigen::Map<Mat3>(y.data() + 42) = f0;

  const RotatingTerms terms = o.terms;
  auto make = [&p, &path, terms](double lo, double hi) -> ode::System {
    const PieceClock clock(path, p.T, lo, hi);
    return [&p, &path, terms, clock](const ode::State& yy, ode::State& dy, double t) {
      const auto [s, side] = clock.at(t);
      const Eigen::Map<const Mat3> f(yy.data() + 42);
      const FrameRates rates = frame_rates(p, path, f, s, side);
      Eigen::Map<const Mat67> ph(yy.data());
      Eigen::Map<Mat67> dph(dy.data());
      for (int c = 0; c < 7; ++c) {
        const Vec3 xt = ph.col(c).head<3>();
        const Vec3 vt = ph.col(c).tail<3>();
        Vec3 acc = rotating_rhs(xt, vt, rates, p, terms);
        if (c < 6) {
          // Homogeneous columns: remove the constant drive.
          acc.z() -= p.omega * p.omega * p.a;
        }
        dph.col(c).head<3>() = vt;
        dph.col(c).tail<3>() = acc;
      }
      const Vec3 n = path.n(s);
      Eigen::Map<Mat3>(dy.data() + 42) = frame_derivative(p, n, path.dn(s, side), f);
    };
  };

  // The frame's angular velocity jumps at breakpoints, so dx̃/dt does too
  // while (x, P) stay continuous: re-map the columns through lab there.
  std::vector<double> edges{0.0};
  for (double b : scaled_breakpoints(path, p.T)) {
    if (b > 0.0 && b < t_end) {
      edges.push_back(b);
    }
  }
  edges.push_back(t_end);
  const auto options = make_options(o);
  auto project = [](ode::State& state) { reorthonormalize(state.data() + 42); };
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double lo = edges[j];
    const double hi = edges[j + 1];
    const double grid[] = {hi};
    ode::integrate(make(lo, hi), y, lo, grid, options, nullptr, project);
    if (j + 2 < edges.size()) {
      const Eigen::Map<const Mat3> f(y.data() + 42);
      const double s = PieceClock(path, p.T, lo, hi).s_hi;
      const Vec3 n = path.n(s);
      const Mat6 jump =
          to_rotating_matrix(p, f, frame_derivative(p, n, path.dn(s, Side::right), f)) *
          from_rotating_matrix(p, f, frame_derivative(p, n, path.dn(s, Side::left), f));
      Eigen::Map<Mat67> ph(y.data());
      ph = (jump * ph).eval();
    }
  }
  AffinePropagator rot;
  Eigen::Map<const Mat67> ph(y.data());
  rot.S = ph.leftCols<6>();
  rot.b = ph.col(6);
  const Mat3 f_end = Eigen::Map<const Mat3>(y.data() + 42);

  const double s_end = PieceClock(path, p.T, edges[edges.size() - 2], t_end).s_hi;
  const Vec3 n_end = path.n(s_end);
  const Mat3 fdot_end = frame_derivative(p, n_end, path.dn(s_end, Side::left), f_end);
  const Mat6 c1 = from_rotating_matrix(p, f_end, fdot_end);
  AffinePropagator out;
  out.S = c1 * rot.S;
  out.b = c1 * rot.b;
  return out;
}

}  // namespace

void SystemParams::validate() const
{
  if (!std::isfinite(omega_c) || !std::isfinite(omega) || !std::isfinite(a) ||
      !std::isfinite(T)) {
    throw InputError("system parameters must be finite");
  }
  if (!(omega > 0.0)) {
    throw InputError("trap frequency omega must be positive");
  }
  if (omega_c == 0.0) {
    throw InputError("cyclotron frequency omega_c must be non-zero");
  }
  if (!(T > 0.0)) {
    throw InputError("duration T must be positive");
  }
  if (std::abs(omega - std::abs(omega_c)) / omega <= 1e-3) {
    throw InputError("omega and |omega_c| are resonant (relative gap <= 1e-3)");
  }
}

double SystemParams::magnetic_length() const
{
  return 1.0 / std::sqrt(std::abs(omega_c));
}

double AffinePropagator::symplectic_defect() const
{
  const Mat6 j = symplectic_form();
  return (S.transpose() * j * S - j).norm();
}

AffinePropagator operator*(const AffinePropagator& outer, const AffinePropagator& inner)
{
  AffinePropagator out;
  out.S = outer.S * inner.S;
  out.b = outer.S * inner.b + outer.b;
  if (outer.phase && inner.phase) {
    out.phase = *outer.phase + *inner.phase;
  }
  return out;
}

Eigen::Matrix<double, 7, 7> lab_generator(const SystemParams& p, const Vec3& n)
{
  const Mat3 N = cross_matrix(n);
  const double h = 0.5 * p.omega_c;
  const double w2 = p.omega * p.omega;
  Mat7 g = Mat7::Zero();
  g.block<3, 3>(0, 0) = -h * N;
  g.block<3, 3>(0, 3) = Mat3::Identity();
  g.block<3, 3>(3, 0) = -w2 * n * n.transpose() + h * h * N * N;
  g.block<3, 3>(3, 3) = -h * N;
  g.block<3, 1>(3, 6) = w2 * p.a * n;
  return g;
}

Vec3 velocity(const SystemParams& p, const Vec3& n, const PhaseSpaceState& z)
{
  const Vec3 x = z.head<3>();
  return z.tail<3>() - 0.5 * p.omega_c * n.cross(x);
}

double energy(const SystemParams& p, const Vec3& n, const PhaseSpaceState& z)
{
  const Vec3 v = velocity(p, n, z);
  const double axial = n.dot(z.head<3>()) - p.a;
  return 0.5 * v.squaredNorm() + 0.5 * p.omega * p.omega * axial * axial;
}

PhaseSpaceState lab_rhs(const PhaseSpaceState& z, double t, const SystemParams& p,
                        const FieldPath& path)
{
  const Vec3 n = path.n(t / p.T);
  const Vec3 x = z.head<3>();
  const Vec3 v = velocity(p, n, z);
  PhaseSpaceState dz;
  dz.head<3>() = v;
  dz.tail<3>() = -p.omega * p.omega * n * (n.dot(x) - p.a) - 0.5 * p.omega_c * n.cross(v);
  return dz;
}

FrameRates frame_rates(const SystemParams& p, const FieldPath& path, const Mat3& frame, double s,
                       Side side)
{
  const double eps = p.epsilon();
  const Vec3 dn = path.dn(s, side);
  const Vec3 d2n = path.d2n(s, side);
  FrameRates r;
  r.sigma = eps * Vec2(-frame.col(0).dot(dn), -frame.col(1).dot(dn));
  r.sigma_dot = eps * eps * Vec2(-frame.col(0).dot(d2n), -frame.col(1).dot(d2n));
  r.e3_dot_sq = eps * eps * dn.squaredNorm();
  return r;
}

Vec3 rotating_rhs(const Vec3& xt, const Vec3& vt, const FrameRates& r, const SystemParams& p,
                  RotatingTerms terms)
{
  const double wc = p.omega_c;
  const double s1 = r.sigma.x();
  const double s2 = r.sigma.y();
  Vec3 acc;
  acc.x() = wc * vt.y() - 0.5 * wc * s2 * xt.z();
  acc.y() = -wc * vt.x() + 0.5 * wc * s1 * xt.z();
  acc.z() = -p.omega * p.omega * (xt.z() - p.a);
  if (terms == RotatingTerms::full) {
    const double ds1 = r.sigma_dot.x();
    const double ds2 = r.sigma_dot.y();
    acc.x() += 2 * s1 * vt.z() + s1 * s1 * xt.x() + s1 * s2 * xt.y() + ds1 * xt.z();
    acc.y() += 2 * s2 * vt.z() + s2 * s2 * xt.y() + s1 * s2 * xt.x() + ds2 * xt.z();
    acc.z() += r.e3_dot_sq * xt.z() - 0.5 * wc * s2 * xt.x() + 0.5 * wc * s1 * xt.y() -
               2 * s1 * vt.x() - 2 * s2 * vt.y() - ds1 * xt.x() - ds2 * xt.y();
  }
  return acc;
}

Vec6 to_rotating(const SystemParams& p, const Mat3& frame, const Mat3& frame_dot, const Vec6& lab)
{
  return to_rotating_matrix(p, frame, frame_dot) * lab;
}

Vec6 from_rotating(const SystemParams& p, const Mat3& frame, const Mat3& frame_dot,
                   const Vec6& rotating)
{
  return from_rotating_matrix(p, frame, frame_dot) * rotating;
}

AffinePropagator integrate_propagator(const SystemParams& p, const FieldPath& path, Frame frame,
                                      const PropagatorOptions& options,
                                      std::optional<double> t_end)
{
  p.validate();
  const double t1 = t_end.value_or(p.T);
  check_time(t1);
  if (t1 > p.T * (1.0 + 1e-12)) {
    throw InputError("integration end time exceeds the sweep duration T");
  }
  if (t1 == 0.0) {
    return AffinePropagator::identity();
  }
  if (frame == Frame::lab) {
    const double times[] = {t1};
    return lab_propagator(p, path, times, options, nullptr);
  }
  return rotating_propagator(p, path, t1, options);
}

std::vector<AffinePropagator> propagator_history(const SystemParams& p, const FieldPath& path,
                                                 std::span<const double> times,
                                                 const PropagatorOptions& options)
{
  p.validate();
  for (double t : times) {
    check_time(t);
  }
  std::vector<AffinePropagator> history;
  history.reserve(times.size());
  lab_propagator(p, path, times, options, &history);
  return history;
}

Vec6 simplified_solution(const SystemParams& p, const FieldPath& path, const Vec6& rotating0,
                         double t, double tol)
{
  p.validate();
  check_time(t);
  const double wc = p.omega_c;
  const double w = p.omega;
  const Vec3 x0 = rotating0.head<3>();
  const Vec3 v0 = rotating0.tail<3>();

  auto axial = [&](double tt) {
    return p.a + (x0.z() - p.a) * std::cos(w * tt) + v0.z() / w * std::sin(w * tt);
  };
  auto axial_rate = [&](double tt) {
    return -(x0.z() - p.a) * w * std::sin(w * tt) + v0.z() * std::cos(w * tt);
  };

  // Drift ½∫σ_μ x̃3⁽⁰⁾ dt, integrated in s together with the frame.
  ode::State y(11, 0.0);
  Eigen::Map<Mat3>(y.data()) = initial_frame(path.n(0.0));
  const double s_end = t / p.T;
  auto make = [&](double lo, double hi) -> ode::System {
    return [&, lo, hi](const ode::State& yy, ode::State& dy, double s) {
      const Vec3 n = path.n(s);
      const Vec3 dn = path.dn_on(s, lo, hi);
      const Eigen::Map<const Mat3> f(yy.data());
      Eigen::Map<Mat3>(dy.data()) = cross_matrix(n.cross(dn)) * f;
      const double x3 = axial(s * p.T);
      dy[9] = -0.5 * f.col(0).dot(dn) * x3;
      dy[10] = -0.5 * f.col(1).dot(dn) * x3;
    };
  };
  ode::Options options;
  options.rtol = tol;
  options.atol = tol;
  options.method = ode::Method::fehlberg78;
  const double times[] = {s_end};
  Mat3 f_end = Eigen::Map<const Mat3>(y.data());
  Vec2 drift = Vec2::Zero();
  if (s_end > 0.0) {
    ode::integrate_pieces(
        make, y, 0.0, times, path.breakpoints(), options,
        [&](double, const ode::State& state) {
          f_end = Eigen::Map<const Mat3>(state.data());
          drift = {state[9], state[10]};
        },
        [](ode::State& state) { reorthonormalize(state.data()); });
  }

  // Planar velocity = drift ½σ x̃3 + free cyclotron part.
  const Mat3 f0 = initial_frame(path.n(0.0));
  const Vec2 u0 = v0.head<2>() - 0.5 * frame_rates(p, path, f0, 0.0).sigma * x0.z();
  const double c = std::cos(wc * t);
  const double sn = std::sin(wc * t);
  Vec6 out;
  out(0) = x0.x() + (u0.x() * sn + u0.y() * (1.0 - c)) / wc + drift.x();
  out(1) = x0.y() + (-u0.x() * (1.0 - c) + u0.y() * sn) / wc + drift.y();
  out(2) = axial(t);
  const FrameRates rates = frame_rates(p, path, f_end, s_end, s_end > 0.0 ? Side::left : Side::right);
  out(3) = u0.x() * c + u0.y() * sn + 0.5 * rates.sigma.x() * axial(t);
  out(4) = -u0.x() * sn + u0.y() * c + 0.5 * rates.sigma.y() * axial(t);
  out(5) = axial_rate(t);
  return out;
}

std::vector<TrajectorySample> trajectory(const SystemParams& p, const FieldPath& path,
                                         const PhaseSpaceState& z0, std::size_t samples,
                                         double tol)
{
  p.validate();
  if (samples < 2) {
    throw InputError("trajectory needs at least two samples");
  }
  std::vector<double> times(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    times[k] = p.T * static_cast<double>(k) / static_cast<double>(samples - 1);
  }
  times.back() = p.T;

  ode::State y(15, 0.0);
  Eigen::Map<Vec6>(y.data()) = z0;
  Eigen::Map<Mat3>(y.data() + 6) = initial_frame(path.n(0.0));
  auto make = [&p, &path](double lo, double hi) -> ode::System {
    const PieceClock clock(path, p.T, lo, hi);
    return [&p, &path, clock](const ode::State& yy, ode::State& dy, double t) {
      const auto [s, side] = clock.at(t);
      const Vec3 n = path.n(s);
      Eigen::Map<Vec6>(dy.data()) = lab_rhs(Eigen::Map<const Vec6>(yy.data()), t, p, path);
      const Eigen::Map<const Mat3> f(yy.data() + 6);
      Eigen::Map<Mat3>(dy.data() + 6) = frame_derivative(p, n, path.dn(s, side), f);
    };
  };
  std::vector<TrajectorySample> rows;
  rows.reserve(samples);
  PropagatorOptions po;
  po.tol = tol;
  ode::integrate_pieces(
      make, y, 0.0, times, scaled_breakpoints(path, p.T), make_options(po),
      [&](double t, const ode::State& state) {
        TrajectorySample row;
        row.t = t;
        row.z = Eigen::Map<const Vec6>(state.data());
        const Eigen::Map<const Mat3> f(state.data() + 6);
        row.x_rotating = f.transpose() * row.z.head<3>();
        row.energy = energy(p, path.n(t / p.T), row.z);
        rows.push_back(row);
      },
      [](ode::State& state) { reorthonormalize(state.data() + 6); });
  return rows;
}

void write_trajectory_csv(const std::string& file, std::span<const TrajectorySample> rows)
{
  std::ofstream out(file);
  if (!out) {
    throw InputError("cannot write '" + file + "'");
  }
  out << "t,x1,x2,x3,P1,P2,P3,xt1,xt2,xt3,energy\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (const auto& r : rows) {
    put(r.t, ',');
    for (int i = 0; i < 6; ++i) {
      put(r.z(i), ',');
    }
    for (int i = 0; i < 3; ++i) {
      put(r.x_rotating(i), ',');
    }
    put(r.energy, '\n');
  }
}

}  // namespace adiamag
