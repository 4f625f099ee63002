#include "adiamag/magtrans.hpp"

#include <cmath>

#include "quadrature.hpp"

namespace adiamag
{

MagneticTranslation compose(const MagneticTranslation& m2, const MagneticTranslation& m1,
                            const FluxConstants& k)
{
  return {m1.d + m2.d, m1.phase + m2.phase - 0.5 * k.kappa * cross2(m1.d, m2.d)};
}

double loop_phase(std::span<const Vec2> vertices, const FluxConstants& k)
{
  if (vertices.size() < 2) {
    throw InputError("loop needs at least two vertices");
  }
  if ((vertices.back() - vertices.front()).norm() > 1e-12 * (1.0 + vertices.front().norm())) {
    throw InputError("polygon is not closed: first and last vertex differ");
  }
  // Edges are composed from a base point at the first vertex.
  MagneticTranslation total;
  for (std::size_t j = 1; j < vertices.size(); ++j) {
    total = compose({vertices[j] - vertices[j - 1], 0.0}, total, k);
  }
  return total.phase;
}

double phi_P(const DisplacementCurve& curve, const FluxConstants& k)
{
  const auto& s = curve.s;
  const std::size_t n = s.size();
  if (n < 2) {
    return 0.0;
  }
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = curve.d[j].x() * curve.d_prime[j].y();
  }
  const double integral = detail::cumulative_simpson(s, f).back();
  const Vec2 d = curve.d.back();
  return -k.kappa * (integral - 0.5 * d.x() * d.y());
}

double phi_P(const FieldPath& path, double a, const FluxConstants& k, double s, double tol,
             std::size_t intervals)
{
  if (!std::isfinite(k.kappa)) {
    throw InputError("kappa must be finite");
  }
  return phi_P(displacement(path, s, a, tol, intervals), k);
}

MagneticTranslation path_ordered_oracle(const DisplacementCurve& curve, const FluxConstants& k,
                                        std::size_t segments)
{
  if (segments < 2) {
    throw InputError("path-ordered product needs at least two segments");
  }
  const double s0 = curve.s.front();
  const double s1 = curve.s.back();
  MagneticTranslation total;
  Vec2 prev = curve.d.front();
  for (std::size_t j = 1; j <= segments; ++j) {
    const Vec2 next = j == segments
                          ? curve.d.back()
                          : curve.at(s0 + (s1 - s0) * static_cast<double>(j) /
                                              static_cast<double>(segments));
    total = compose({next - prev, 0.0}, total, k);
    prev = next;
  }
  return total;
}

}  // namespace adiamag
