#include "adiamag/adiabatic.hpp"

#include <cmath>

namespace adiamag
{

AffinePropagator FactorizedPropagator::total() const
{
  AffinePropagator t = R_part * M_part * D_part;
  t.phase = phi_P;
  return t;
}

AffinePropagator magnetic_shift(const SystemParams& p, const Vec3& n0, const Vec3& d_lab)
{
  AffinePropagator m;
  m.b.head<3>() = d_lab;
  m.b.tail<3>() = 0.5 * p.kappa() * n0.cross(d_lab);
  return m;
}

FactorizedPropagator build_factorized(const SystemParams& p, const FieldPath& path, double s,
                                      const FactorizedOptions& options)
{
  p.validate();
  if (!(s >= 0.0 && s <= 1.0)) {
    throw InputError("factorization parameter s must lie in [0, 1]");
  }
  FactorizedPropagator f;
  f.params = p;
  f.s = s;
  f.n0 = path.n(0.0);
  f.initial_frame = initial_frame(f.n0);

  const DisplacementCurve curve =
      displacement(path, s, p.a, options.geometry_tol, options.intervals);
  f.d = curve.end();
  f.d_lab = displacement_lab(f.initial_frame, f.d);
  f.phi_P = phi_P(curve, FluxConstants{p.kappa()});

  const double grid[] = {s};
  f.frame = transport_frame(path, grid, options.geometry_tol).front().matrix();
  f.Q = f.frame * f.initial_frame.transpose();

  f.R_part.S.setZero();
  f.R_part.S.topLeftCorner<3, 3>() = f.Q;
  f.R_part.S.bottomRightCorner<3, 3>() = f.Q;
  f.M_part = magnetic_shift(p, f.n0, f.d_lab);

  PropagatorOptions po;
  po.tol = options.ode_tol;
  f.D_part = integrate_propagator(p, FieldPath::constant(f.n0), Frame::lab, po, s * p.T);
  return f;
}

ErrorReport compare(const AffinePropagator& direct, const AffinePropagator& fact)
{
  ErrorReport r;
  r.map_error = (direct.S - fact.S).norm();
  r.offset_error = (direct.b - fact.b).norm();
  r.relative_map_error = r.map_error / direct.S.norm();
  const double bn = direct.b.norm();
  r.relative_offset_error = bn > 0.0 ? r.offset_error / bn : r.offset_error;
  return r;
}

ErrorReport compare(const AffinePropagator& direct, const FactorizedPropagator& fact)
{
  return compare(direct, fact.total());
}

}  // namespace adiamag
