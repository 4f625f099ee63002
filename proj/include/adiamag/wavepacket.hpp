#ifndef ADIAMAG_WAVEPACKET_HPP
#define ADIAMAG_WAVEPACKET_HPP

#include "adiamag/adiabatic.hpp"
#include "adiamag/dynamics.hpp"
#include "adiamag/types.hpp"

namespace adiamag
{

/// ψ(x) = exp(i[½ ξᵀZξ + p·ξ + γ]),  ξ = x - q.
///
/// Im Z > 0 makes ψ normalizable; Im γ carries the log-norm.
struct GaussianState
{
  Vec3 q = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  Mat3c Z = Mat3c::Identity() * Complex(0.0, 1.0);
  Complex gamma = 0.0;

  Vec6 center() const;

  /// log ‖ψ‖.
  double log_norm() const;

  /// Symmetrized covariance of (x, P).
  Mat6 covariance() const;

  /// Throws InputError unless Im Z is symmetric positive definite.
  void validate() const;
};

/// Lowest Landau level ⊗ oscillator ground state of H(n(0)), normalized,
/// centred at a·n(0) with zero mean velocity.
GaussianState ground_state(const SystemParams& p, const Vec3& n0);

/// ⟨H⟩ with field direction n.
double energy_expectation(const SystemParams& p, const Vec3& n, const GaussianState& state);

/// Exact evolution under H(n(t/T)) from t = 0 to t_end (default T): the
/// centre follows Hamilton's equations, Z the matrix Riccati flow and γ the
/// action plus the width correction.
GaussianState propagate(const GaussianState& state, const SystemParams& p, const FieldPath& path,
                        double tol = 1e-12, std::optional<double> t_end = std::nullopt);

/// exp(-i d·K) ψ with K = P + (κ/2) n0×x.
GaussianState translate(const GaussianState& state, const SystemParams& p, const Vec3& n0,
                        const Vec3& d_lab);

/// ψ(Qᵀx).
GaussianState rotate(const GaussianState& state, const Mat3& Q);

/// R·M_P·D applied to an axisymmetric ground state; D is evolved with the
/// static H(n0) flow. Refuses states that are not stationary and
/// axisymmetric about n(0).
GaussianState apply_factorized(const FactorizedPropagator& fact, const GaussianState& state,
                               double tol = 1e-12);

/// ⟨s1|s2⟩.
Complex overlap(const GaussianState& s1, const GaussianState& s2);

}  // namespace adiamag

#endif  // ADIAMAG_WAVEPACKET_HPP
