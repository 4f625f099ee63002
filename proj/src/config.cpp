#include "adiamag/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace adiamag
{

namespace
{

using json = nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed)
{
  if (!obj.is_object()) {
    throw InputError(where + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw InputError("unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& obj, const std::string& key, const std::string& where)
{
  if (!obj.contains(key)) {
    throw InputError(where + "." + key + " is required");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw InputError(where + "." + key + " must be a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw InputError(where + "." + key + " must be finite");
  }
  return x;
}

Vec3 vec3(const json& v, const std::string& where)
{
  if (!v.is_array() || v.size() != 3) {
    throw InputError(where + " must be an array of three numbers");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) {
      throw InputError(where + " must be an array of three numbers");
    }
    out(i) = v[i].get<double>();
  }
  if (!out.allFinite()) {
    throw InputError(where + " must be finite");
  }
  return out;
}

FieldPath parse_path(const json& p, const std::string& base_dir, std::string& description)
{
  if (!p.is_object() || !p.contains("kind") || !p.at("kind").is_string()) {
    throw InputError("path.kind is required");
  }
  const std::string kind = p.at("kind").get<std::string>();
  description = kind;
  if (kind == "latitude") {
    only_keys(p, "path", {"kind", "theta0", "turns", "phi0"});
    const double theta0 = number(p, "theta0", "path");
    int turns = 1;
    if (p.contains("turns")) {
      if (!p.at("turns").is_number_integer()) {
        throw InputError("path.turns must be an integer");
      }
      turns = p.at("turns").get<int>();
    }
    const double phi0 = p.contains("phi0") ? number(p, "phi0", "path") : 0.0;
    return FieldPath::latitude(theta0, turns, phi0);
  }
  if (kind == "slerp") {
    only_keys(p, "path", {"kind", "waypoints", "closed"});
    if (!p.contains("waypoints") || !p.at("waypoints").is_array()) {
      throw InputError("path.waypoints must be an array");
    }
    std::vector<Vec3> pts;
    for (std::size_t k = 0; k < p.at("waypoints").size(); ++k) {
      pts.push_back(vec3(p.at("waypoints")[k], "path.waypoints[" + std::to_string(k) + "]"));
    }
    bool closed = false;
    if (p.contains("closed")) {
      if (!p.at("closed").is_boolean()) {
        throw InputError("path.closed must be a boolean");
      }
      closed = p.at("closed").get<bool>();
    }
    return FieldPath::slerp(std::move(pts), closed);
  }
  if (kind == "table") {
    only_keys(p, "path", {"kind", "file"});
    if (!p.contains("file") || !p.at("file").is_string()) {
      throw InputError("path.file must be a string");
    }
    std::filesystem::path file = p.at("file").get<std::string>();
    if (file.is_relative()) {
      file = std::filesystem::path(base_dir) / file;
    }
    return FieldPath::table_from_csv(file.string());
  }
  if (kind == "constant") {
    only_keys(p, "path", {"kind", "n"});
    return FieldPath::constant(p.contains("n") ? vec3(p.at("n"), "path.n") : Vec3::UnitZ());
  }
  throw InputError("unknown path kind '" + kind + "'");
}

double tolerance(const json& t, const std::string& key, double fallback)
{
  if (!t.contains(key)) {
    return fallback;
  }
  const double v = number(t, key, "tolerances");
  if (!(v > 0.0 && v <= 1e-2)) {
    throw InputError("tolerances." + key + " must lie in (0, 1e-2]");
  }
  return v;
}

std::size_t count(const json& obj, const std::string& key, std::size_t fallback,
                  std::size_t minimum)
{
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_number_unsigned()) {
    throw InputError("outputs." + key + " must be a non-negative integer");
  }
  const auto v = obj.at(key).get<std::size_t>();
  if (v < minimum) {
    throw InputError("outputs." + key + " must be at least " + std::to_string(minimum));
  }
  return v;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir, bool require_params)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(doc, "config", {"params", "path", "tolerances", "sweep", "seed", "outputs", "initial"});

  RunConfig cfg;
  if (doc.contains("params")) {
    const json& p = doc.at("params");
    only_keys(p, "params", {"omega_c", "omega", "a", "T"});
    cfg.params.omega_c = number(p, "omega_c", "params");
    cfg.params.omega = number(p, "omega", "params");
    cfg.params.a = number(p, "a", "params");
    cfg.params.T = number(p, "T", "params");
    cfg.params.validate();
    cfg.has_params = true;
  } else if (require_params) {
    throw InputError("params block is required");
  }

  if (!doc.contains("path")) {
    throw InputError("path block is required");
  }
  cfg.path = parse_path(doc.at("path"), base_dir, cfg.path_description);

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    only_keys(t, "tolerances", {"ode_tol", "quad_tol"});
    cfg.tolerances.ode_tol = tolerance(t, "ode_tol", cfg.tolerances.ode_tol);
    cfg.tolerances.quad_tol = tolerance(t, "quad_tol", cfg.tolerances.quad_tol);
  }

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    only_keys(s, "sweep", {"T"});
    if (!s.contains("T") || !s.at("T").is_array()) {
      throw InputError("sweep.T must be an array of durations");
    }
    for (const auto& v : s.at("T")) {
      if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) {
        throw InputError("sweep.T entries must be positive numbers");
      }
      cfg.sweep_T.push_back(v.get<double>());
    }
  }

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) {
      throw InputError("seed must be a non-negative integer");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    only_keys(o, "outputs", {"dir", "trajectory_samples", "frame_samples"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) {
        throw InputError("outputs.dir must be a string");
      }
      cfg.out_dir = o.at("dir").get<std::string>();
    }
    cfg.trajectory_samples = count(o, "trajectory_samples", cfg.trajectory_samples, 2);
    cfg.frame_samples = count(o, "frame_samples", cfg.frame_samples, 2);
  }

  if (doc.contains("initial")) {
    const json& i = doc.at("initial");
    only_keys(i, "initial", {"x", "P"});
    Vec6 z = Vec6::Zero();
    if (i.contains("x")) {
      z.head<3>() = vec3(i.at("x"), "initial.x");
    }
    if (i.contains("P")) {
      z.tail<3>() = vec3(i.at("P"), "initial.P");
    }
    cfg.initial = z;
  }
  return cfg;
}

RunConfig load_config(const std::string& file, bool require_params)
{
  std::ifstream in(file);
  if (!in) {
    throw InputError("cannot read config '" + file + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::path(file).parent_path().string();
  return parse_config(buf.str(), base.empty() ? "." : base, require_params);
}

}  // namespace adiamag
