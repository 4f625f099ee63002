#include "adiamag/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <set>

#include "adiamag/wavepacket.hpp"

namespace adiamag
{

namespace
{

Json vec_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

std::filesystem::path prepare(const std::string& out_dir)
{
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw InputError("cannot create output directory '" + out_dir + "': " + ec.message());
  }
  return out_dir;
}

// Uniform in [lo, hi) from the raw generator output; independent of the
// standard library's distribution implementations.
double uniform(std::mt19937_64& rng, double lo, double hi)
{
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

InitialMoments moments_of(const GaussianState& g)
{
  return {g.center(), g.covariance()};
}

// Ground state plus two seeded product states: a displaced coherent state
// and a squeezed, displaced one. All satisfy the stationarity conditions.
std::vector<InitialMoments> alpha_states(const SystemParams& p, const Vec3& n0,
                                         std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  const Mat3 f0 = initial_frame(n0);
  const GaussianState g0 = ground_state(p, n0);
  std::vector<InitialMoments> states{moments_of(g0)};

  const double lb = p.magnetic_length();
  for (int k = 0; k < 2; ++k) {
    GaussianState g = g0;
    const double r = lb * uniform(rng, 0.5, 2.0);
    const double phi = uniform(rng, 0.0, 2.0 * 3.141592653589793);
    g.q = p.a * n0 + r * (std::cos(phi) * f0.col(0) + std::sin(phi) * f0.col(1));
    g.p = 0.5 * p.kappa() * n0.cross(g.q);
    if (k == 1) {
      Mat3c z = Mat3c::Zero();
      const double y1 = 0.5 * std::abs(p.kappa()) * uniform(rng, 0.5, 2.0);
      const double y2 = 0.5 * std::abs(p.kappa()) * uniform(rng, 0.5, 2.0);
      const double x12 = uniform(rng, -0.5, 0.5);
      z(0, 0) = Complex(0.0, y1);
      z(1, 1) = Complex(0.0, y2);
      z(0, 1) = z(1, 0) = Complex(x12, 0.0);
      z(2, 2) = Complex(0.0, p.omega * uniform(rng, 0.5, 2.0));
      g.Z = f0.cast<Complex>() * z * f0.transpose().cast<Complex>();
    }
    states.push_back(moments_of(g));
  }
  return states;
}

void write_frames_csv(const std::string& file, const FieldPath& path, std::size_t samples,
                      double tol)
{
  std::vector<double> grid(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    grid[k] = static_cast<double>(k) / static_cast<double>(samples - 1);
  }
  grid.back() = 1.0;
  const auto frames = transport_frame(path, grid, tol);
  const DisplacementCurve curve = displacement(path, 1.0, 1.0, tol);
  const Mat3 f0t = initial_frame(path.n(0.0)).transpose();

  std::ofstream out(file);
  if (!out) {
    throw InputError("cannot write '" + file + "'");
  }
  out << "s,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z,E11,E12,E13,E21,E22,E23,E31,E32,E33,"
         "sigma1,sigma2,d1,d2\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (const auto& f : frames) {
    put(f.s, ',');
    for (const Vec3* e : {&f.e1, &f.e2, &f.e3}) {
      for (int i = 0; i < 3; ++i) {
        put((*e)(i), ',');
      }
    }
    const Mat3 E = f0t * f.matrix();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        put(E(i, j), ',');
      }
    }
    const Vec2 sg = sigma_at(path, f, f.s >= 1.0 ? Side::left : Side::right).rate;
    put(sg.x(), ',');
    put(sg.y(), ',');
    const Vec2 d = curve.at(f.s);
    put(d.x(), ',');
    put(d.y(), '\n');
  }
}

}  // namespace

EvolutionReport run_evolution(const SystemParams& p, const FieldPath& path, const Tolerances& tol,
                              std::uint64_t seed)
{
  p.validate();
  EvolutionReport r;
  r.T = p.T;

  PropagatorOptions po;
  po.tol = tol.ode_tol;
  const AffinePropagator direct = integrate_propagator(p, path, Frame::lab, po);
  FactorizedOptions fo;
  fo.ode_tol = tol.ode_tol;
  fo.geometry_tol = tol.quad_tol;
  const FactorizedPropagator fact = build_factorized(p, path, 1.0, fo);
  r.errors = compare(direct, fact);
  r.direct_symplectic_defect = direct.symplectic_defect();
  r.factorized_symplectic_defect = fact.total().symplectic_defect();
  r.displacement = fact.d;
  r.phi_P = fact.phi_P;

  // Classical equilibrium start: the orbit centre should end displaced by d.
  Vec6 z0 = Vec6::Zero();
  z0.head<3>() = p.a * fact.n0;
  const Vec3 x_end = direct.apply(z0).head<3>();
  const Vec3 xt = fact.frame.transpose() * x_end;
  r.displacement_error = (xt.head<2>() - fact.d).norm();

  if (path.closed()) {
    r.solid_angle = solid_angle(path, tol.quad_tol);
    r.holonomy_angle = std::atan2(fact.frame.col(0).dot(fact.initial_frame.col(1)),
                                  fact.frame.col(0).dot(fact.initial_frame.col(0)));
  }

  // α from three different initial states, and a grid-halving bound.
  const auto states = alpha_states(p, fact.n0, seed);
  AlphaOptions ao;
  ao.ode_tol = tol.ode_tol;
  ao.geometry_tol = tol.quad_tol;
  std::vector<double> alphas;
  for (const auto& m : states) {
    alphas.push_back(berry_alpha(p, path, m, ao).final_alpha);
  }
  const auto [lo, hi] = std::minmax_element(alphas.begin(), alphas.end());
  r.alpha = alphas.front();
  r.alpha_spread = *hi - *lo;
  r.alpha_states = states.size();
  AlphaOptions coarse = ao;
  coarse.intervals = ao.intervals / 2;
  const AlphaResult half = berry_alpha(p, path, states.front(), coarse);
  r.alpha_bound = 10.0 * (std::abs(half.final_alpha - r.alpha) +
                          std::abs(half.final_phi_P - r.phi_P)) +
                  1e-10 * (1.0 + std::abs(r.phi_P));

  AlphaOptions exact = ao;
  exact.source = MomentSource::direct;
  r.alpha_direct = berry_alpha(p, path, states.front(), exact).final_alpha;

  const GaussianState g0 = ground_state(p, fact.n0);
  const GaussianState evolved = propagate(g0, p, path, tol.ode_tol);
  const GaussianState factored = apply_factorized(fact, g0, tol.ode_tol);
  const Complex ov = overlap(factored, evolved);
  r.overlap_abs = std::abs(ov);
  r.overlap_arg = std::arg(ov);
  r.norm_drift = std::abs(evolved.log_norm() - g0.log_norm());
  return r;
}

Json evolution_json(const EvolutionReport& r)
{
  Json j;
  j["T"] = r.T;
  j["map_error"] = r.errors.map_error;
  j["offset_error"] = r.errors.offset_error;
  j["relative_map_error"] = r.errors.relative_map_error;
  j["relative_offset_error"] = r.errors.relative_offset_error;
  j["symplectic_defect_direct"] = r.direct_symplectic_defect;
  j["symplectic_defect_factorized"] = r.factorized_symplectic_defect;
  j["displacement"] = vec_json(r.displacement);
  j["displacement_error"] = r.displacement_error;
  j["phi_P"] = r.phi_P;
  j["alpha"] = r.alpha;
  j["alpha_bound"] = r.alpha_bound;
  j["alpha_within_bound"] = std::abs(r.alpha - r.phi_P) <= r.alpha_bound;
  j["alpha_state_spread"] = r.alpha_spread;
  j["alpha_states"] = r.alpha_states;
  j["alpha_direct"] = r.alpha_direct;
  const double scale = std::abs(r.phi_P);
  j["alpha_direct_relative_error"] =
      scale > 0.0 ? std::abs(r.alpha_direct - r.phi_P) / scale : std::abs(r.alpha_direct);
  if (r.solid_angle) {
    j["solid_angle"] = *r.solid_angle;
    j["holonomy_angle"] = *r.holonomy_angle;
  }
  j["overlap_abs"] = r.overlap_abs;
  j["overlap_arg"] = r.overlap_arg;
  j["norm_drift"] = r.norm_drift;
  return j;
}

OrderFit fit_order(const std::vector<double>& T, const std::vector<double>& error, double floor,
                   double lo, double hi)
{
  OrderFit f;
  const std::size_t n = T.size();
  if (std::all_of(error.begin(), error.end(), [floor](double e) { return !(e > floor); })) {
    f.skipped = true;
    return f;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::log(T[k]);
    const double y = std::log(std::max(error[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(n);
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  f.order = -slope;
  f.monotone = true;
  for (std::size_t k = 1; k < n; ++k) {
    f.monotone = f.monotone && error[k] < error[k - 1];
  }
  f.pass = f.order >= lo && f.order <= hi;
  return f;
}

Json cmd_geometry(const RunConfig& cfg, const std::string& out_dir)
{
  const auto dir = prepare(out_dir);
  const FieldPath& path = cfg.path;
  const double tol = cfg.tolerances.quad_tol;
  write_frames_csv((dir / "frames.csv").string(), path, cfg.frame_samples, tol);

  const double a = cfg.has_params ? cfg.params.a : 1.0;
  const DisplacementCurve curve = displacement(path, 1.0, a, tol);
  Json j;
  j["path"] = cfg.path_description;
  j["closed"] = path.closed();
  j["n0"] = vec_json(path.n(0.0));
  j["a"] = a;
  j["displacement"] = vec_json(curve.end());
  j["displacement_norm"] = curve.end().norm();
  const FrameMatrix E = frame_matrix(path, 1.0, tol);
  j["frame_matrix_end"] = Json::array();
  for (int i = 0; i < 3; ++i) {
    j["frame_matrix_end"].push_back(vec_json(Vec3(E.E.row(i).transpose())));
  }
  if (path.closed()) {
    const Holonomy h = holonomy(path, tol);
    j["solid_angle"] = solid_angle(path, tol);
    j["holonomy_angle"] = h.angle_about_n0;
    j["holonomy_axis"] = vec_json(h.axis_angle.axis);
    j["holonomy_rotation_angle"] = h.axis_angle.angle;
  }
  if (cfg.has_params) {
    j["kappa"] = cfg.params.kappa();
    j["phi_P"] = phi_P(curve, FluxConstants{cfg.params.kappa()});
  }
  write_json((dir / "summary.json").string(), j);
  return j;
}

Json cmd_evolve(const RunConfig& cfg, const std::string& out_dir)
{
  if (!cfg.has_params) {
    throw InputError("evolve needs a params block");
  }
  const auto dir = prepare(out_dir);
  const SystemParams& p = cfg.params;
  const EvolutionReport r = run_evolution(p, cfg.path, cfg.tolerances, cfg.seed);
  Json j = evolution_json(r);

  Vec6 z0 = Vec6::Zero();
  z0.head<3>() = p.a * cfg.path.n(0.0);
  if (cfg.initial) {
    z0 = *cfg.initial;
  }
  const auto rows = trajectory(p, cfg.path, z0, cfg.trajectory_samples, cfg.tolerances.ode_tol);
  write_trajectory_csv((dir / "trajectory.csv").string(), rows);
  double drift = 0.0;
  for (const auto& row : rows) {
    drift = std::max(drift, std::abs(row.energy - rows.front().energy));
  }
  j["trajectory_energy_drift"] = drift;
  write_json((dir / "summary.json").string(), j);
  return j;
}

Json cmd_converge(const RunConfig& cfg, const std::string& out_dir)
{
  if (!cfg.has_params) {
    throw InputError("converge needs a params block");
  }
  if (cfg.sweep_T.size() < 3) {
    throw InputError("convergence sweep needs at least three T values");
  }
  std::vector<double> Ts = cfg.sweep_T;
  std::sort(Ts.begin(), Ts.end());
  if (std::adjacent_find(Ts.begin(), Ts.end()) != Ts.end()) {
    throw InputError("convergence sweep has repeated T values");
  }
  for (double T : Ts) {
    SystemParams p = cfg.params;
    p.T = T;
    p.validate();
  }
  const auto dir = prepare(out_dir);

  std::vector<std::future<EvolutionReport>> jobs;
  for (double T : Ts) {
    SystemParams p = cfg.params;
    p.T = T;
    jobs.push_back(std::async(std::launch::async, [p, &cfg] {
      return run_evolution(p, cfg.path, cfg.tolerances, cfg.seed);
    }));
  }
  std::vector<EvolutionReport> reports;
  for (auto& job : jobs) {
    reports.push_back(job.get());
  }

  Json runs = Json::array();
  std::vector<double> map_err, offset_err, disp_err, alpha_err, overlap_def, phase_err;
  for (const auto& r : reports) {
    runs.push_back(evolution_json(r));
    map_err.push_back(r.errors.map_error);
    offset_err.push_back(r.errors.offset_error);
    disp_err.push_back(r.displacement_error);
    const double scale = std::abs(r.phi_P);
    alpha_err.push_back(scale > 0.0 ? std::abs(r.alpha_direct - r.phi_P) / scale : 0.0);
    overlap_def.push_back(1.0 - r.overlap_abs);
    phase_err.push_back(std::abs(r.overlap_arg));
  }

  Json fits;
  // Expected order 1 in ε, except the overlap modulus whose defect is O(ε²).
  auto add = [&](const char* name, const std::vector<double>& e, double expected = 1.0) {
    const OrderFit f = fit_order(Ts, e, 1e-12, expected - 0.2, expected + 0.2);
    Json m;
    m["skipped"] = f.skipped;
    m["expected_order"] = expected;
    if (!f.skipped) {
      m["order"] = f.order;
      m["monotone"] = f.monotone;
      m["pass"] = f.pass;
    }
    fits[name] = m;
  };
  add("map_error", map_err);
  add("offset_error", offset_err);
  add("displacement_error", disp_err);
  add("alpha_direct_relative_error", alpha_err);
  add("overlap_defect", overlap_def, 2.0);
  add("overlap_phase", phase_err);

  Json j;
  j["order_tolerance"] = 0.2;
  j["runs"] = runs;
  j["fits"] = fits;
  write_json((dir / "sweep.json").string(), j);
  return j;
}

}  // namespace adiamag
