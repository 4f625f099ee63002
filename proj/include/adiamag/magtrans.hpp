#ifndef ADIAMAG_MAGTRANS_HPP
#define ADIAMAG_MAGTRANS_HPP

#include <span>
#include <vector>

#include "adiamag/geometry.hpp"
#include "adiamag/types.hpp"

namespace adiamag
{

/// κ = qB/ħc, the inverse-area scale of every flux phase. Its sign carries
/// the charge and field orientation.
struct FluxConstants
{
  double kappa = 1.0;
};

/// M(d) with an accumulated phase: the element exp(i·phase)·exp(-i d·K) of
/// the magnetic translation group. `d` is in the plane basis (e1(0), e2(0));
/// the phase is kept unwrapped.
struct MagneticTranslation
{
  Vec2 d = Vec2::Zero();
  double phase = 0.0;

  static MagneticTranslation identity() { return {}; }
  MagneticTranslation inverse() const { return {-d, -phase}; }
};

/// m2 · m1 (m1 acts first). The phases add with the central correction
/// -(κ/2)(d1 × d2).
MagneticTranslation compose(const MagneticTranslation& m2, const MagneticTranslation& m1,
                            const FluxConstants& k);

/// Phase acquired by composing the edge translations of a closed polygon in
/// order; equals -κ times its signed area. First and last vertex must agree.
double loop_phase(std::span<const Vec2> vertices, const FluxConstants& k);

/// The phase φ_P(s) separating the path-ordered translation along the
/// displacement curve from the single translation M(d(s)):
///
///   φ_P = -κ (a²/4) [ ∫ σ2(s') S1(s') ds' - ½ S1(s) S2(s) ],  S_μ = ∫ σ_μ.
///
/// Nested composite Simpson on the transported σ samples, piecewise over the
/// smooth pieces of the path.
double phi_P(const FieldPath& path, double a, const FluxConstants& k, double s,
             double tol = 1e-12, std::size_t intervals = 8192);

/// Same integral from an already sampled displacement curve (d = (a/2)S).
double phi_P(const DisplacementCurve& curve, const FluxConstants& k);

/// Brute-force path-ordered product: N chords of the displacement curve at
/// equal steps in s, composed in path order. The displacement telescopes to
/// d(s) exactly; the phase converges to φ_P as O(1/N²).
MagneticTranslation path_ordered_oracle(const DisplacementCurve& curve, const FluxConstants& k,
                                        std::size_t segments);

}  // namespace adiamag

#endif  // ADIAMAG_MAGTRANS_HPP
