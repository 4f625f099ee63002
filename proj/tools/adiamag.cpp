#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adiamag/commands.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Adiabatic evolution of a charged particle in a slowly rotating magnetic field"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
          seed = v;
          seed_given = true;
        },
        "seed for the randomized checks (overrides the config)");
    return sub;
  };
  CLI::App* geometry = add("geometry", "transported frames, displacement and solid angle");
  CLI::App* evolve = add("evolve", "direct vs factorized evolution for one duration T");
  CLI::App* converge = add("converge", "convergence sweep over the configured T values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const bool needs_params = !geometry->parsed();
    adiamag::RunConfig cfg = adiamag::load_config(config_file, needs_params);
    if (seed_given) {
      cfg.seed = seed;
    }
    if (out_dir.empty()) {
      out_dir = cfg.out_dir.value_or(".");
    }
    if (geometry->parsed()) {
      adiamag::cmd_geometry(cfg, out_dir);
    } else if (evolve->parsed()) {
      adiamag::cmd_evolve(cfg, out_dir);
    } else if (converge->parsed()) {
      adiamag::cmd_converge(cfg, out_dir);
    }
  } catch (const adiamag::InputError& e) {
    std::fprintf(stderr, "adiamag: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "adiamag: config: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "adiamag: numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
