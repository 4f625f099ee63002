#ifndef ADIAMAG_CONFIG_HPP
#define ADIAMAG_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adiamag/dynamics.hpp"
#include "adiamag/geometry.hpp"

namespace adiamag
{

struct Tolerances
{
  double ode_tol = 1e-12;
  double quad_tol = 1e-12;
};

/// Parsed run configuration. All quantities are in units ħ = m = c = 1.
struct RunConfig
{
  SystemParams params;
  bool has_params = false;
  FieldPath path = FieldPath::constant(Vec3::UnitZ());
  std::string path_description;
  Tolerances tolerances;
  std::vector<double> sweep_T;
  std::uint64_t seed = 0;
  std::optional<std::string> out_dir;
  std::optional<Vec6> initial;  // classical initial (x, P) for trajectories
  std::size_t trajectory_samples = 2001;
  std::size_t frame_samples = 257;
};

/// Parses and validates a configuration document. Relative table paths are
/// resolved against `base_dir`. `require_params` makes the params block
/// mandatory. Throws InputError on any schema or range violation.
RunConfig parse_config(const std::string& text, const std::string& base_dir,
                       bool require_params = true);

RunConfig load_config(const std::string& file, bool require_params = true);

}  // namespace adiamag

#endif  // ADIAMAG_CONFIG_HPP
