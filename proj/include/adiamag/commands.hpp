#ifndef ADIAMAG_COMMANDS_HPP
#define ADIAMAG_COMMANDS_HPP

#include <optional>
#include <string>
#include <vector>

#include "adiamag/adiabatic.hpp"
#include "adiamag/config.hpp"
#include "adiamag/report.hpp"

namespace adiamag
{

/// Everything one evolve run measures.
struct EvolutionReport
{
  double T = 0.0;
  ErrorReport errors;
  double direct_symplectic_defect = 0.0;
  double factorized_symplectic_defect = 0.0;
  Vec2 displacement = Vec2::Zero();
  double displacement_error = 0.0;  // |x̃_μ(T) - x̃_μ(0) - d_μ| along the direct flow
  double phi_P = 0.0;
  double alpha = 0.0;          // moments from R·M·D
  double alpha_direct = 0.0;   // moments from the exact flow
  double alpha_bound = 0.0;    // quadrature bound for |alpha - phi_P|
  double alpha_spread = 0.0;   // max pairwise difference across the states
  std::size_t alpha_states = 0;
  std::optional<double> solid_angle;
  std::optional<double> holonomy_angle;
  double overlap_abs = 0.0;
  double overlap_arg = 0.0;
  double norm_drift = 0.0;
};

EvolutionReport run_evolution(const SystemParams& p, const FieldPath& path,
                              const Tolerances& tol, std::uint64_t seed);

Json evolution_json(const EvolutionReport& r);

/// Log-log least-squares fit of error against T, reported as an order
/// (minus the slope). Metrics at or below `floor` are skipped.
struct OrderFit
{
  bool skipped = false;
  double order = 0.0;
  bool monotone = false;
  bool pass = false;
};

OrderFit fit_order(const std::vector<double>& T, const std::vector<double>& error,
                   double floor = 1e-12, double lo = 0.8, double hi = 1.2);

/// The three subcommands. Each writes its files into `out_dir` (created if
/// needed) and returns the summary it wrote.
Json cmd_geometry(const RunConfig& cfg, const std::string& out_dir);
Json cmd_evolve(const RunConfig& cfg, const std::string& out_dir);
Json cmd_converge(const RunConfig& cfg, const std::string& out_dir);

}  // namespace adiamag

#endif  // ADIAMAG_COMMANDS_HPP
