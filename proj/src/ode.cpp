#include "adiamag/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "adiamag/types.hpp"

namespace adiamag::ode
{

namespace odeint = boost::numeric::odeint;

namespace
{

template <class Controlled>
void run(Controlled stepper, const System& f, State& y, double t0,
         std::span<const double> targets, const Options& options,
         const Observer& observer, const Projection& project)
{
  double t = t0;
  double h = 0.0;
  std::size_t steps = 0;

  auto system = [&f](const State& x, State& dxdt, double tt) { f(x, dxdt, tt); };

  for (const double target : targets) {
    const double scale = std::max({1.0, std::abs(t0), std::abs(target)});
    if (h == 0.0) {
      h = std::max(std::abs(target - t) * 1e-3, 1e-6 * scale);
    }
    while (target - t > 1e-13 * scale) {
      if (++steps > options.max_steps) {
        throw NumericalError("ode step budget of " + std::to_string(options.max_steps) +
                             " exceeded at t = " + std::to_string(t));
      }
      const bool clipped = h >= target - t;
      double trial = clipped ? target - t : h;
      const double t_before = t;
      const auto result = stepper.try_step(system, y, t, trial);
      if (result == odeint::success) {
        if (clipped) {
          t = target;
        } else {
          h = trial;
        }
        if (project) {
          project(y);
          // FSAL steppers cache the last derivative, now stale.
          if constexpr (requires { stepper.reset(); }) {
            stepper.reset();
          }
        }
      } else {
        h = trial;
        if (h < 1e-15 * scale) {
          throw NumericalError("ode step size underflow at t = " + std::to_string(t_before));
        }
      }
    }
    t = target;
    if (observer) {
      observer(t, y);
    }
  }
}

void check(std::span<const double> times, double t0, const Options& options)
{
  if (options.rtol <= 0.0 || options.atol <= 0.0) {
    throw InputError("ode tolerances must be positive");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw InputError("ode sample times must be ascending");
  }
  if (!times.empty() && times.front() < t0) {
    throw InputError("ode sample times must not precede the initial time");
  }
}

}  // namespace

void integrate(const System& f, State& y, double t0, std::span<const double> times,
               const Options& options, const Observer& observer, const Projection& project)
{
  check(times, t0, options);
  switch (options.method) {
    case Method::dopri5:
      run(odeint::make_controlled(options.atol, options.rtol,
                                  odeint::runge_kutta_dopri5<State>()),
          f, y, t0, times, options, observer, project);
      break;
    case Method::fehlberg78:
      run(odeint::make_controlled(options.atol, options.rtol,
                                  odeint::runge_kutta_fehlberg78<State>()),
          f, y, t0, times, options, observer, project);
      break;
  }
}

void integrate_pieces(const PieceSystem& make_system, State& y, double t0,
                      std::span<const double> times, std::span<const double> breakpoints,
                      const Options& options, const Observer& observer,
                      const Projection& project)
{
  check(times, t0, options);
  const double t_end = times.empty() ? t0 : times.back();
  std::vector<double> edges{t0};
  for (double b : breakpoints) {
    if (b > t0 && b < t_end) {
      edges.push_back(b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges.push_back(t_end);

  std::size_t next = 0;
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double lo = edges[j];
    const double hi = edges[j + 1];
    std::vector<double> piece_times;
    while (next < times.size() && times[next] <= hi) {
      piece_times.push_back(times[next++]);
    }
    if (piece_times.empty() || piece_times.back() < hi) {
      piece_times.push_back(hi);
      // Internal piece end, not a requested sample.
      const double marker = hi;
      integrate(make_system(lo, hi), y, lo, piece_times, options,
                [&observer, marker](double t, const State& s) {
                  if (t != marker && observer) {
                    observer(t, s);
                  }
                },
                project);
    } else {
      integrate(make_system(lo, hi), y, lo, piece_times, options, observer, project);
    }
  }
  // Samples equal to t0 when there is no interval to integrate.
  while (next < times.size()) {
    if (observer) {
      observer(times[next], y);
    }
    ++next;
  }
}

}  // namespace adiamag::ode
