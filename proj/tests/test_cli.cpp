#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "adiamag/commands.hpp"

using namespace adiamag;
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name)
{
  const fs::path dir = fs::path(ADIAMAG_TEST_TMP) / "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc)
{
  const fs::path file = dir / "config.json";
  std::ofstream(file) << doc.dump(2);
  return file;
}

json read_json(const fs::path& file)
{
  std::ifstream in(file);
  return json::parse(in);
}

std::string slurp(const fs::path& file)
{
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args)
{
  const std::string cmd = std::string("\"") + ADIAMAG_CLI + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json latitude_config(double T)
{
  return {{"params", {{"omega_c", 2.7}, {"omega", 1.0}, {"a", 1.0}, {"T", T}}},
          {"path", {{"kind", "latitude"}, {"theta0", kPi / 3}, {"turns", 1}}},
          {"seed", 7}};
}

}  // namespace

TEST(Config, ParsesFullDocument)
{
  const json doc = {{"params", {{"omega_c", -2.0}, {"omega", 1.0}, {"a", 0.5}, {"T", 40.0}}},
                    {"path",
                     {{"kind", "slerp"},
                      {"waypoints", {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}}},
                      {"closed", true}}},
                    {"tolerances", {{"ode_tol", 1e-10}, {"quad_tol", 1e-11}}},
                    {"sweep", {{"T", {10, 20, 40}}}},
                    {"seed", 3},
                    {"outputs", {{"dir", "out"}, {"trajectory_samples", 11}}}};
  const RunConfig cfg = parse_config(doc.dump(), ".", true);
  EXPECT_EQ(cfg.params.omega_c, -2.0);
  EXPECT_EQ(cfg.params.T, 40.0);
  EXPECT_TRUE(cfg.path.closed());
  EXPECT_EQ(cfg.tolerances.ode_tol, 1e-10);
  EXPECT_EQ(cfg.sweep_T.size(), 3u);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.trajectory_samples, 11u);
}

TEST(Config, RejectsSchemaViolations)
{
  const std::string base = R"("path": {"kind": "latitude", "theta0": 1.0})";
  auto bad = [](const std::string& text) {
    EXPECT_THROW(parse_config(text, ".", true), InputError) << text;
  };
  bad("{" + base + "}");  // params missing
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1}, )" + base + "}");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10, "m": 1}, )" + base + "}");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10}, "bogus": 1, )" + base + "}");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10}, "path": {"kind": "spiral"}})");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": -1}, )" + base + "}");
  bad(R"({"params": {"omega_c": 1.0001, "omega": 1, "a": 1, "T": 10}, )" + base + "}");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10}, "tolerances": {"ode_tol": 0.5}, )" +
      base + "}");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10}, "seed": -4, )" + base + "}");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10}, "path": {"kind": "table", "file": "missing.csv"}})");
  bad(R"({"params": {"omega_c": 2, "omega": 1, "a": 1, "T": 10}, "path": {"kind": "slerp", "waypoints": [[0,0,1]]}})");
  // Geometry needs no params.
  EXPECT_NO_THROW(parse_config("{" + base + "}", ".", false));
}

TEST(Geometry, HemisphereLoopEnclosesPi)
{
  const fs::path dir = scratch("geometry_equator");
  RunConfig cfg = parse_config(
      R"({"path": {"kind": "latitude", "theta0": 1.5707963267948966, "turns": 1}})", ".", false);
  const Json j = cmd_geometry(cfg, dir.string());
  EXPECT_NEAR(std::abs(j.at("solid_angle").get<double>()), 2 * kPi, 1e-9);
  EXPECT_NEAR(std::abs(wrap_angle(j.at("holonomy_angle").get<double>())), 0.0, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "frames.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_EQ(read_json(dir / "summary.json").at("closed"), true);

  cfg = parse_config(R"({"path": {"kind": "latitude", "theta0": 1.0471975511965976, "turns": 1}})",
                     ".", false);
  const Json k = cmd_geometry(cfg, scratch("geometry_cap").string());
  EXPECT_NEAR(k.at("solid_angle").get<double>(), kPi, 1e-9);
  EXPECT_NEAR(k.at("holonomy_angle").get<double>(), kPi, 1e-6);
}

TEST(Geometry, ConstantPathHasNoDisplacementAndOpenPathNoArea)
{
  RunConfig cfg = parse_config(R"({"path": {"kind": "constant", "n": [0, 1, 0]}})", ".", false);
  const Json j = cmd_geometry(cfg, scratch("geometry_constant").string());
  EXPECT_EQ(j.at("displacement_norm").get<double>(), 0.0);

  cfg = parse_config(
      R"({"path": {"kind": "slerp", "waypoints": [[0, 0, 1], [1, 0, 0]], "closed": false}})", ".",
      false);
  const Json k = cmd_geometry(cfg, scratch("geometry_open").string());
  EXPECT_EQ(k.at("closed"), false);
  EXPECT_FALSE(k.contains("solid_angle"));
  EXPECT_GT(k.at("displacement_norm").get<double>(), 0.0);
}

TEST(Evolve, ConstantPathIsAtToleranceFloor)
{
  json doc = latitude_config(20.0);
  doc["path"] = {{"kind", "constant"}, {"n", {0, 0, 1}}};
  doc["outputs"] = {{"trajectory_samples", 21}};
  const fs::path dir = scratch("evolve_constant");
  const Json j = cmd_evolve(parse_config(doc.dump(), ".", true), dir.string());
  EXPECT_LT(j.at("map_error").get<double>(), 1e-9);
  EXPECT_LT(j.at("offset_error").get<double>(), 1e-9);
  EXPECT_EQ(j.at("phi_P").get<double>(), 0.0);
  EXPECT_NEAR(j.at("overlap_abs").get<double>(), 1.0, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
}

TEST(Evolve, LatitudeLoopReportsConsistentPhase)
{
  const fs::path dir = scratch("evolve_latitude");
  const Json j = cmd_evolve(parse_config(latitude_config(200.0).dump(), ".", true), dir.string());
  const double phi = j.at("phi_P").get<double>();
  const double alpha = j.at("alpha").get<double>();
  EXPECT_TRUE(std::isfinite(phi));
  EXPECT_TRUE(std::isfinite(alpha));
  EXPECT_TRUE(j.at("alpha_within_bound").get<bool>());
  EXPECT_LE(std::abs(alpha - phi), j.at("alpha_bound").get<double>());
  EXPECT_LT(j.at("alpha_state_spread").get<double>(), 1e-8);
  EXPECT_GT(j.at("overlap_abs").get<double>(), 0.95);
  EXPECT_NEAR(j.at("solid_angle").get<double>(), kPi, 1e-9);
  EXPECT_EQ(read_json(dir / "summary.json").at("phi_P").get<double>(), phi);
}

TEST(Converge, RejectsShortOrDuplicateSweeps)
{
  json doc = latitude_config(100.0);
  doc["sweep"] = {{"T", {100, 200}}};
  EXPECT_THROW(cmd_converge(parse_config(doc.dump(), ".", true), scratch("c1").string()),
               InputError);
  doc["sweep"] = {{"T", {100, 200, 200}}};
  EXPECT_THROW(cmd_converge(parse_config(doc.dump(), ".", true), scratch("c2").string()),
               InputError);
}

TEST(Converge, ZeroOffsetSkipsDisplacementMetric)
{
  json doc = latitude_config(50.0);
  doc["params"]["a"] = 0.0;
  doc["sweep"] = {{"T", {50, 100, 200}}};
  const Json j = cmd_converge(parse_config(doc.dump(), ".", true), scratch("c3").string());
  EXPECT_TRUE(j.at("fits").at("displacement_error").at("skipped").get<bool>());
  EXPECT_EQ(j.at("runs").size(), 3u);
  EXPECT_FALSE(j.at("fits").at("map_error").at("skipped").get<bool>());
}

TEST(FitOrder, RecoversKnownSlopes)
{
  const std::vector<double> T{100, 200, 400, 800};
  std::vector<double> e1, e2, flat;
  for (double t : T) {
    e1.push_back(3.0 / t);
    e2.push_back(5.0 / (t * t));
    flat.push_back(1e-14);
  }
  const auto f1 = fit_order(T, e1);
  EXPECT_NEAR(f1.order, 1.0, 1e-12);
  EXPECT_TRUE(f1.monotone);
  EXPECT_TRUE(f1.pass);
  const auto f2 = fit_order(T, e2);
  EXPECT_NEAR(f2.order, 2.0, 1e-12);
  EXPECT_FALSE(f2.pass);
  EXPECT_TRUE(fit_order(T, flat).skipped);
  std::vector<double> bumpy = e1;
  bumpy[2] = bumpy[1] * 1.1;
  EXPECT_FALSE(fit_order(T, bumpy).monotone);
}

TEST(Binary, ExitCodes)
{
  const fs::path dir = scratch("binary");
  const fs::path good = write_config(dir, latitude_config(30.0));
  EXPECT_EQ(run_cli("geometry --config \"" + good.string() + "\" --out \"" +
                    (dir / "g").string() + "\""),
            0);
  EXPECT_TRUE(fs::exists(dir / "g" / "summary.json"));

  json resonant = latitude_config(30.0);
  resonant["params"]["omega_c"] = 1.0002;
  const fs::path rdir = dir / "resonant";
  fs::create_directories(rdir);
  const fs::path r = write_config(rdir, resonant);
  EXPECT_EQ(run_cli("evolve --config \"" + r.string() + "\" --out \"" + (dir / "r").string() + "\""),
            2);

  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  EXPECT_EQ(run_cli("evolve --config \"" + broken.string() + "\""), 2);
  EXPECT_EQ(run_cli("evolve --config \"" + (dir / "absent.json").string() + "\""), 2);
  EXPECT_EQ(run_cli("evolve"), 2);
  EXPECT_EQ(run_cli("frobnicate --config x"), 2);
}

TEST(Binary, EvolveIsByteDeterministic)
{
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_config(dir, latitude_config(40.0));
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(run_cli("evolve --config \"" + cfg.string() + "\" --out \"" + (dir / out).string() +
                      "\" --seed 11"),
              0);
  }
  EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));
  EXPECT_EQ(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "b" / "trajectory.csv"));
  EXPECT_FALSE(slurp(dir / "a" / "summary.json").empty());
}
