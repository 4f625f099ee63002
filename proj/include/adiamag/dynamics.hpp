#ifndef ADIAMAG_DYNAMICS_HPP
#define ADIAMAG_DYNAMICS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adiamag/geometry.hpp"
#include "adiamag/types.hpp"

namespace adiamag
{

/// Constants of H = ½|P - (ω_c/2) n×x|² + ½ω²(n·x - a)² in units ħ = m = c = 1.
struct SystemParams
{
  double omega_c = 1.0;  // cyclotron frequency qB/mc (signed)
  double omega = 1.0;    // axial trap frequency
  double a = 0.0;        // equilibrium offset along n
  double T = 1.0;        // duration of the sweep, s = t/T

  /// Throws InputError unless ω > 0, ω_c ≠ 0, T > 0, all finite, and the
  /// axial and cyclotron frequencies are at least 1e-3 (relative) apart.
  void validate() const;

  double kappa() const { return omega_c; }
  double epsilon() const { return 1.0 / T; }
  double magnetic_length() const;
};

/// Phase-space point (x1, x2, x3, P1, P2, P3), lab components.
using PhaseSpaceState = Vec6;

/// z ↦ S z + b, with the scalar phase of the underlying unitary when known.
struct AffinePropagator
{
  Mat6 S = Mat6::Identity();
  Vec6 b = Vec6::Zero();
  std::optional<double> phase;

  static AffinePropagator identity() { return {}; }

  Vec6 apply(const Vec6& z) const { return S * z + b; }

  /// ‖SᵀJS - J‖_F.
  double symplectic_defect() const;
};

/// outer ∘ inner (inner acts first). Phases add when both are known.
AffinePropagator operator*(const AffinePropagator& outer, const AffinePropagator& inner);

/// 7×7 generator of the affine flow on (x, P, 1) with field direction n.
Eigen::Matrix<double, 7, 7> lab_generator(const SystemParams& p, const Vec3& n);

/// H with field direction n.
double energy(const SystemParams& p, const Vec3& n, const PhaseSpaceState& z);

/// Kinematic velocity P - (ω_c/2) n×x.
Vec3 velocity(const SystemParams& p, const Vec3& n, const PhaseSpaceState& z);

/// Hamilton's equations in the lab frame at time t (n evaluated at s = t/T).
PhaseSpaceState lab_rhs(const PhaseSpaceState& z, double t, const SystemParams& p,
                        const FieldPath& path);

/// Which right-hand side to use in the rotating frame.
enum class RotatingTerms
{
  full,        // every σ, σ̇ and ė3² term
  simplified,  // only the ∓(ω_c/2)σ x̃3 drive
};

/// Geometry at one instant, in time units: σ_μ = ė_μ·n, σ̇_μ, ė3².
struct FrameRates
{
  Vec2 sigma = Vec2::Zero();
  Vec2 sigma_dot = Vec2::Zero();
  double e3_dot_sq = 0.0;
};

/// Rates from the transported frame at s, converting d/ds to d/dt with ε.
FrameRates frame_rates(const SystemParams& p, const FieldPath& path, const Mat3& frame, double s,
                       Side side = Side::right);

/// Second derivatives of the rotating components x̃ given (x̃, dx̃/dt).
Vec3 rotating_rhs(const Vec3& xt, const Vec3& vt, const FrameRates& rates, const SystemParams& p,
                  RotatingTerms terms = RotatingTerms::full);

enum class Frame
{
  lab,
  rotating,
};

struct PropagatorOptions
{
  double tol = 1e-12;
  RotatingTerms terms = RotatingTerms::full;
  std::size_t max_steps = 20'000'000;
};

/// Fundamental-matrix integration of the affine flow from t = 0 to t_end
/// (defaults to T). With the rotating frame, (x̃, dx̃/dt) are integrated
/// together with the transported frame and the result is mapped back to lab
/// (x, P) at both ends.
AffinePropagator integrate_propagator(const SystemParams& p, const FieldPath& path, Frame frame,
                                      const PropagatorOptions& options = {},
                                      std::optional<double> t_end = std::nullopt);

/// Lab-frame propagators from 0 to each of the ascending times.
std::vector<AffinePropagator> propagator_history(const SystemParams& p, const FieldPath& path,
                                                 std::span<const double> times,
                                                 const PropagatorOptions& options = {});

/// (x̃, dx̃/dt) → (x, P) given the frame and its time derivative.
Vec6 from_rotating(const SystemParams& p, const Mat3& frame, const Mat3& frame_dot,
                   const Vec6& rotating);
/// (x, P) → (x̃, dx̃/dt).
Vec6 to_rotating(const SystemParams& p, const Mat3& frame, const Mat3& frame_dot,
                 const Vec6& lab);

/// Closed-form approximation of the simplified rotating system: free
/// cyclotron and oscillator motion plus the drift ½∫σ_μ x̃3⁽⁰⁾ dt'. Input and
/// output are (x̃, dx̃/dt).
Vec6 simplified_solution(const SystemParams& p, const FieldPath& path, const Vec6& rotating0,
                         double t, double tol = 1e-12);

/// One dense trajectory sample.
struct TrajectorySample
{
  double t = 0.0;
  PhaseSpaceState z;
  Vec3 x_rotating;
  double energy = 0.0;  // H with the instantaneous n
};

std::vector<TrajectorySample> trajectory(const SystemParams& p, const FieldPath& path,
                                         const PhaseSpaceState& z0, std::size_t samples,
                                         double tol = 1e-12);

/// Columns t, x1..x3, P1..P3, xt1..xt3, energy.
void write_trajectory_csv(const std::string& file, std::span<const TrajectorySample> rows);

}  // namespace adiamag

#endif  // ADIAMAG_DYNAMICS_HPP
