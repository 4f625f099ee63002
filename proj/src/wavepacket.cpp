#include "adiamag/wavepacket.hpp"

#include <cmath>
#include <numbers>

#include "adiamag/ode.hpp"

namespace adiamag
{

namespace
{

constexpr Complex I{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

struct QuadraticParts
{
  Mat3 xx;  // ½ xᵀ Hxx x
  Mat3 xp;  // xᵀ Hxp P
  Vec3 hx;
  double h0 = 0.0;
};

QuadraticParts hamiltonian_parts(const SystemParams& p, const Vec3& n)
{
  const Mat3 N = cross_matrix(n);
  const double h = 0.5 * p.omega_c;
  const double w2 = p.omega * p.omega;
  QuadraticParts q;
  q.xx = h * h * N.transpose() * N + w2 * n * n.transpose();
  q.xp = h * N;
  q.hx = -w2 * p.a * n;
  q.h0 = 0.5 * w2 * p.a * p.a;
  return q;
}

// State: q (3), p (3), Z (9 complex), γ (complex).
constexpr std::size_t kSize = 6 + 18 + 2;

void pack(const GaussianState& g, ode::State& y)
{
  y.assign(kSize, 0.0);
  for (int i = 0; i < 3; ++i) {
    y[i] = g.q(i);
    y[3 + i] = g.p(i);
  }
  for (int j = 0; j < 9; ++j) {
    y[6 + 2 * j] = g.Z.data()[j].real();
    y[7 + 2 * j] = g.Z.data()[j].imag();
  }
  y[24] = g.gamma.real();
  y[25] = g.gamma.imag();
}

GaussianState unpack(const ode::State& y)
{
  GaussianState g;
  for (int i = 0; i < 3; ++i) {
    g.q(i) = y[i];
    g.p(i) = y[3 + i];
  }
  for (int j = 0; j < 9; ++j) {
    g.Z.data()[j] = Complex(y[6 + 2 * j], y[7 + 2 * j]);
  }
  g.gamma = Complex(y[24], y[25]);
  return g;
}

bool axisymmetric(const GaussianState& s, const Vec3& n0, const SystemParams& p)
{
  const Mat3 f0 = initial_frame(n0);
  const Mat3c z = f0.transpose().cast<Complex>() * s.Z * f0.cast<Complex>();
  const double scale = 1.0 + z.norm();
  const double tol = 1e-8 * scale;
  const bool planar_iso = std::abs(z(0, 0) - z(1, 1)) < tol && std::abs(z(0, 1)) < tol &&
                          std::abs(z(1, 0)) < tol;
  const bool decoupled = std::abs(z(0, 2)) < tol && std::abs(z(1, 2)) < tol &&
                         std::abs(z(2, 0)) < tol && std::abs(z(2, 1)) < tol;
  const double center_scale = 1e-8 * (1.0 + s.q.norm());
  const bool on_axis = (s.q - n0.dot(s.q) * n0).norm() < center_scale &&
                       velocity(p, n0, s.center()).norm() < center_scale;
  return planar_iso && decoupled && on_axis;
}

}  // namespace

Vec6 GaussianState::center() const
{
  Vec6 c;
  c << q, p;
  return c;
}

double GaussianState::log_norm() const
{
  const Mat3 y = Z.imag();
  return 0.5 * (-2.0 * gamma.imag() + 1.5 * std::log(kPi) - 0.5 * std::log(y.determinant()));
}

Mat6 GaussianState::covariance() const
{
  const Mat3 x = Z.real();
  const Mat3 y = Z.imag();
  const Mat3 sxx = (2.0 * y).inverse();
  Mat6 c;
  c.topLeftCorner<3, 3>() = sxx;
  c.topRightCorner<3, 3>() = sxx * x;
  c.bottomLeftCorner<3, 3>() = x * sxx;
  c.bottomRightCorner<3, 3>() = x * sxx * x + 0.5 * y;
  return c;
}

void GaussianState::validate() const
{
  if (!q.allFinite() || !p.allFinite() || !Z.allFinite() || !std::isfinite(gamma.real()) ||
      !std::isfinite(gamma.imag())) {
    throw InputError("Gaussian state has non-finite parameters");
  }
  if ((Z - Z.transpose()).norm() > 1e-10 * (1.0 + Z.norm())) {
    throw InputError("Gaussian width matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(Mat3(0.5 * (Z.imag() + Z.imag().transpose())));
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw InputError("Gaussian width has no positive-definite imaginary part");
  }
}

GaussianState ground_state(const SystemParams& p, const Vec3& n0_in)
{
  p.validate();
  const Vec3 n0 = n0_in.normalized();
  const Mat3 axial = n0 * n0.transpose();
  const Mat3 planar = Mat3::Identity() - axial;
  GaussianState g;
  g.Z = I * (0.5 * std::abs(p.kappa()) * planar + p.omega * axial).cast<Complex>();
  g.q = p.a * n0;
  g.p = 0.5 * p.kappa() * n0.cross(g.q);
  const double det = g.Z.imag().determinant();
  g.gamma = -I * std::log(std::pow(det / (kPi * kPi * kPi), 0.25));
  return g;
}

double energy_expectation(const SystemParams& p, const Vec3& n, const GaussianState& s)
{
  const QuadraticParts h = hamiltonian_parts(p, n);
  const Mat6 c = s.covariance();
  const double classical = energy(p, n, s.center());
  const double spread = 0.5 * (h.xx * c.topLeftCorner<3, 3>()).trace() +
                        (h.xp * c.bottomLeftCorner<3, 3>()).trace() +
                        0.5 * c.bottomRightCorner<3, 3>().trace();
  return classical + spread;
}

GaussianState propagate(const GaussianState& state, const SystemParams& p, const FieldPath& path,
                        double tol, std::optional<double> t_end)
{
  p.validate();
  state.validate();
  const double t1 = t_end.value_or(p.T);
  if (!(t1 >= 0.0)) {
    throw InputError("propagation time must be non-negative");
  }
  ode::State y;
  pack(state, y);
  if (t1 == 0.0) {
    return state;
  }
  auto make = [&p, &path](double, double) -> ode::System {
    return [&p, &path](const ode::State& yy, ode::State& dy, double t) {
      const Vec3 n = path.n(t / p.T);
      const QuadraticParts h = hamiltonian_parts(p, n);
      const GaussianState g = unpack(yy);
      const Vec3 dq = h.xp.transpose() * g.q + g.p;
      const Vec3 dp = -(h.xx * g.q + h.xp * g.p + h.hx);
      const Mat3c xx = h.xx.cast<Complex>();
      const Mat3c xp = h.xp.cast<Complex>();
      const Mat3c dz = -xx - xp * g.Z - g.Z * xp.transpose() - g.Z * g.Z;
      const double classical = energy(p, n, g.center());
      const Complex dg = g.p.dot(dq) - classical + 0.5 * I * g.Z.trace();
      GaussianState d;
      d.q = dq;
      d.p = dp;
      d.Z = dz;
      d.gamma = dg;
      ode::State out;
      pack(d, out);
      dy = out;
    };
  };
  ode::Options options;
  options.rtol = tol;
  options.atol = tol;
  options.method = ode::Method::fehlberg78;
  auto breaks = path.breakpoints();
  for (double& b : breaks) {
    b *= p.T;
  }
  const double times[] = {t1};
  GaussianState out = state;
  ode::integrate_pieces(make, y, 0.0, times, breaks, options,
                        [&out](double, const ode::State& s) { out = unpack(s); });
  // The Riccati flow keeps Z symmetric; remove round-off asymmetry.
  out.Z = 0.5 * (out.Z + out.Z.transpose()).eval();
  return out;
}

GaussianState translate(const GaussianState& s, const SystemParams& p, const Vec3& n0,
                        const Vec3& d_lab)
{
  const Vec3 u = 0.5 * p.kappa() * n0.cross(d_lab);
  GaussianState out = s;
  out.gamma += u.dot(s.q);
  out.q = s.q + d_lab;
  out.p = s.p + u;
  return out;
}

GaussianState rotate(const GaussianState& s, const Mat3& Q)
{
  GaussianState out = s;
  out.q = Q * s.q;
  out.p = Q * s.p;
  out.Z = Q.cast<Complex>() * s.Z * Q.transpose().cast<Complex>();
  return out;
}

GaussianState apply_factorized(const FactorizedPropagator& f, const GaussianState& state,
                               double tol)
{
  state.validate();
  if (!axisymmetric(state, f.n0, f.params)) {
    throw InputError("apply_factorized needs a state axisymmetric about n(0) at rest on the axis");
  }
  GaussianState g = propagate(state, f.params, FieldPath::constant(f.n0), tol, f.s * f.params.T);
  g = translate(g, f.params, f.n0, f.d_lab);
  g.gamma += f.phi_P;
  return rotate(g, f.Q);
}

Complex overlap(const GaussianState& s1, const GaussianState& s2)
{
  s1.validate();
  s2.validate();
  const Mat3c z1c = s1.Z.conjugate();
  const Mat3c a = -I * (s2.Z - z1c);
  const Eigen::Vector3cd q1 = s1.q.cast<Complex>();
  const Eigen::Vector3cd q2 = s2.q.cast<Complex>();
  const Eigen::Vector3cd b =
      I * (-s2.Z * q2 + s2.p.cast<Complex>()) - I * (-z1c * q1 + s1.p.cast<Complex>());
  const Complex c = I * (0.5 * q2.dot(s2.Z * q2) - s2.p.dot(s2.q) + s2.gamma) -
                    I * (0.5 * q1.dot(z1c * q1) - s1.p.dot(s1.q) + std::conj(s1.gamma));
  // Eigen's dot conjugates its first argument; q is real so this is bilinear.
  const Eigen::ComplexEigenSolver<Mat3c> eig(a);
  Complex root = 1.0;
  for (int i = 0; i < 3; ++i) {
    root *= std::sqrt(eig.eigenvalues()(i));
  }
  const Eigen::Vector3cd x = a.partialPivLu().solve(b);
  const Complex quad = (b.transpose() * x)(0);
  return std::pow(2.0 * kPi, 1.5) / root * std::exp(0.5 * quad + c);
}

}  // namespace adiamag
