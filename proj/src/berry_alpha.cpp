#include <algorithm>
#include <cmath>

#include "adiamag/adiabatic.hpp"
#include "quadrature.hpp"

namespace adiamag
{

namespace
{

// Components of ⟨x × P⟩ from mean and symmetrized covariance. The
// commutator part δ_jk drops out of the antisymmetric contraction.
Vec3 angular_momentum(const Vec6& mean, const Mat6& cov)
{
  Vec3 l = mean.head<3>().cross(mean.tail<3>());
  l.x() += cov(1, 5) - cov(2, 4);
  l.y() += cov(2, 3) - cov(0, 5);
  l.z() += cov(0, 4) - cov(1, 3);
  return l;
}

Mat6 block_rotation(const Mat3& q)
{
  Mat6 r = Mat6::Zero();
  r.topLeftCorner<3, 3>() = q;
  r.bottomRightCorner<3, 3>() = q;
  return r;
}

}  // namespace

void validate_moments(const SystemParams& p, const Vec3& n0, const InitialMoments& m)
{
  const double scale = 1.0 + std::abs(p.a) + m.mean.norm();
  if (!m.mean.allFinite() || !m.cov.allFinite()) {
    throw InputError("initial moments must be finite");
  }
  if (std::abs(n0.dot(m.mean.head<3>()) - p.a) > 1e-9 * scale) {
    throw InputError("initial state is not centred at the trap equilibrium along n(0)");
  }
  if (velocity(p, n0, m.mean).norm() > 1e-9 * scale) {
    throw InputError("initial state has non-zero mean velocity");
  }
  if ((m.cov - m.cov.transpose()).norm() > 1e-12 * (1.0 + m.cov.norm())) {
    throw InputError("initial covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(m.cov);
  if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + m.cov.norm())) {
    throw InputError("initial covariance is not positive semi-definite");
  }
  // Product of planar and axial factors: no axial–planar correlation.
  const Mat3 f0 = initial_frame(n0);
  const Mat6 c = block_rotation(f0.transpose()) * m.cov * block_rotation(f0);
  const int axial[] = {2, 5};
  const int planar[] = {0, 1, 3, 4};
  for (int i : axial) {
    for (int j : planar) {
      if (std::abs(c(i, j)) > 1e-9 * (1.0 + m.cov.norm())) {
        throw InputError("initial state does not factor into planar and axial parts");
      }
    }
  }
}

AlphaResult berry_alpha(const SystemParams& p, const FieldPath& path, const InitialMoments& moments,
                        const AlphaOptions& options)
{
  p.validate();
  const Vec3 n0 = path.n(0.0);
  validate_moments(p, n0, moments);
  const double kappa = p.kappa();

  // Resolve both the slow geometry and, for exact moments, the fast motion.
  const double fastest = std::max(p.omega, std::abs(p.omega_c));
  const auto resolve = static_cast<std::size_t>(std::ceil(4.0 * p.T * fastest));
  const std::size_t intervals =
      std::max(options.intervals, options.source == MomentSource::direct ? resolve : 0);

  const PathSamples g = sample_path(path, 1.0, intervals, options.geometry_tol);
  const std::size_t n = g.size();
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) {
    times[k] = g.s[k] * p.T;
  }

  PropagatorOptions po;
  po.tol = options.ode_tol;
  const bool direct = options.source == MomentSource::direct;
  const auto history =
      propagator_history(p, direct ? path : FieldPath::constant(n0), times, po);

  const Mat3 f0 = g.frame.front();
  std::vector<double> rate(n);
  std::vector<double> flux_rate(n);
  DisplacementCurve curve;
  curve.s = g.s;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 d = 0.5 * p.a * g.sigma_integral[k];
    const Vec2 dd = 0.5 * p.a * g.sigma[k];
    curve.d.push_back(d);
    curve.d_prime.push_back(dd);

    const Mat6 rot = block_rotation(g.frame[k] * f0.transpose());
    const AffinePropagator& h = history[k];
    Vec6 mean_u;
    Mat6 cov_u;
    Vec6 mean_md;
    if (direct) {
      mean_u = h.apply(moments.mean);
      cov_u = h.S * moments.cov * h.S.transpose();
      mean_md = rot.transpose() * mean_u;
    } else {
      const Vec3 d_lab = displacement_lab(f0, d);
      mean_md = magnetic_shift(p, n0, d_lab).apply(h.apply(moments.mean));
      mean_u = rot * mean_md;
      cov_u = rot * h.S * moments.cov * h.S.transpose() * rot.transpose();
    }

    const Vec3 w = g.n[k].cross(g.dn[k]);
    const Vec3 k_lab = mean_md.tail<3>() + 0.5 * kappa * n0.cross(mean_md.head<3>());
    const Vec2 k_plane(f0.col(0).dot(k_lab), f0.col(1).dot(k_lab));
    flux_rate[k] = -0.5 * kappa * cross2(d, dd);
    rate[k] = w.dot(angular_momentum(mean_u, cov_u)) + dd.dot(k_plane) + flux_rate[k];
  }

  AlphaResult out;
  out.s = g.s;
  out.alpha = detail::cumulative_simpson(g.s, rate);
  out.phi_P = detail::cumulative_simpson(g.s, flux_rate);
  out.final_alpha = out.alpha.back();
  out.final_phi_P = phi_P(curve, FluxConstants{kappa});
  return out;
}

}  // namespace adiamag
