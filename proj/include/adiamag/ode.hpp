#ifndef ADIAMAG_ODE_HPP
#define ADIAMAG_ODE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace adiamag::ode
{

using State = std::vector<double>;
using System = std::function<void(const State& y, State& dydt, double t)>;
using Observer = std::function<void(double t, const State& y)>;
using Projection = std::function<void(State& y)>;

enum class Method
{
  dopri5,      // Dormand-Prince 5(4)
  fehlberg78,  // Runge-Kutta-Fehlberg 7(8)
};

struct Options
{
  double rtol = 1e-10;
  double atol = 1e-10;
  std::size_t max_steps = 20'000'000;
  Method method = Method::dopri5;
};

/// Adaptive integration of y' = f(y, t) from t0 through the ascending sample
/// times, calling `observer` at each of them. Steps end exactly on every
/// sample time. `project`, when set, is applied to the state after every
/// accepted step.
///
/// Throws NumericalError when the step-count budget is exhausted or the step
/// size underflows.
void integrate(const System& f, State& y, double t0,
               std::span<const double> times, const Options& options,
               const Observer& observer, const Projection& project = {});

/// Builds the right-hand side valid on the closed piece [lo, hi].
using PieceSystem = std::function<System(double lo, double hi)>;

/// Like integrate(), for right-hand sides that are smooth only between
/// breakpoints. Each piece gets its own system from `make_system`, so stage
/// evaluations at a piece end see the one-sided limit of that piece.
void integrate_pieces(const PieceSystem& make_system, State& y, double t0,
                      std::span<const double> times, std::span<const double> breakpoints,
                      const Options& options, const Observer& observer,
                      const Projection& project = {});

}  // namespace adiamag::ode

#endif  // ADIAMAG_ODE_HPP
