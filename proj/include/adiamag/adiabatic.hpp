#ifndef ADIAMAG_ADIABATIC_HPP
#define ADIAMAG_ADIABATIC_HPP

#include <vector>

#include "adiamag/dynamics.hpp"
#include "adiamag/geometry.hpp"
#include "adiamag/magtrans.hpp"

namespace adiamag
{

/// The adiabatic evolution U = R·M_P·D at parameter s, as classical
/// phase-space actions plus the scalar phase φ_P.
struct FactorizedPropagator
{
  SystemParams params;
  double s = 1.0;
  Vec3 n0 = Vec3::UnitZ();
  Mat3 initial_frame = Mat3::Identity();  // columns e_i(0)
  Mat3 frame = Mat3::Identity();          // columns e_i(s)
  Mat3 Q = Mat3::Identity();              // F(s)F(0)ᵀ, carries e_i(0) to e_i(s)
  Vec2 d = Vec2::Zero();                  // displacement on (e1(0), e2(0))
  Vec3 d_lab = Vec3::Zero();
  double phi_P = 0.0;

  AffinePropagator R_part;  // x → Qx, P → QP
  AffinePropagator M_part;  // x → x + d, P → P + (ω_c/2) n0×d
  AffinePropagator D_part;  // static H(n0) flow over t = sT

  /// R ∘ M ∘ D with phase φ_P. The dynamical phase of D is level dependent
  /// and is not included.
  AffinePropagator total() const;
};

struct FactorizedOptions
{
  double ode_tol = 1e-12;
  double geometry_tol = 1e-12;
  std::size_t intervals = 8192;
};

FactorizedPropagator build_factorized(const SystemParams& p, const FieldPath& path, double s = 1.0,
                                      const FactorizedOptions& options = {});

/// Magnetic translation of the classical state: the shift that leaves the
/// kinematic velocity invariant.
AffinePropagator magnetic_shift(const SystemParams& p, const Vec3& n0, const Vec3& d_lab);

struct ErrorReport
{
  double map_error = 0.0;     // ‖S_direct - S_fact‖_F
  double offset_error = 0.0;  // |b_direct - b_fact|
  double relative_map_error = 0.0;
  double relative_offset_error = 0.0;
};

ErrorReport compare(const AffinePropagator& direct, const FactorizedPropagator& fact);
ErrorReport compare(const AffinePropagator& direct, const AffinePropagator& fact);

/// First and second moments of an initial state: mean (⟨x⟩, ⟨P⟩) and the
/// symmetrized covariance.
struct InitialMoments
{
  Vec6 mean = Vec6::Zero();
  Mat6 cov = Mat6::Zero();
};

/// Where the moments at time t come from.
enum class MomentSource
{
  factorized,  // propagated by R·M·D, as in the adiabatic solution
  direct,      // propagated by the exact finite-T flow
};

struct AlphaResult
{
  std::vector<double> s;
  std::vector<double> alpha;   // cumulative
  std::vector<double> phi_P;   // on the same grid
  double final_alpha = 0.0;
  double final_phi_P = 0.0;
};

struct AlphaOptions
{
  MomentSource source = MomentSource::factorized;
  double ode_tol = 1e-12;
  double geometry_tol = 1e-12;
  std::size_t intervals = 4096;  // per unit s; raised to resolve the motion
};

/// Checks that the moments describe a product state along n0 with ⟨x̃3⟩ = a
/// and vanishing mean velocity. Throws InputError otherwise.
void validate_moments(const SystemParams& p, const Vec3& n0, const InitialMoments& m);

/// Integrates the phase rate
///   α̇ = (n×ṅ)·⟨x×P⟩ + ḋ·⟨K⟩ - (κ/2)(d×ḋ),
/// K_μ = e_μ(0)·(P + (κ/2) n0×x), where ⟨x×P⟩ is taken in the evolved
/// state and ⟨K⟩ in the state with the rotation removed.
AlphaResult berry_alpha(const SystemParams& p, const FieldPath& path, const InitialMoments& moments,
                        const AlphaOptions& options = {});

}  // namespace adiamag

#endif  // ADIAMAG_ADIABATIC_HPP
