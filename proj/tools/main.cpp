#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "anisoac/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Phase-field solver and geometric diagnostics on periodic tori"};
  app.require_subcommand(1);

  std::string config_path, outdir;
  std::vector<std::string> overrides;
  int seed = -1;
  app.add_option("-c,--config", config_path, "Config file (key=value lines)");
  app.add_option("-o,--out", outdir, "Output directory");
  app.add_option("-s,--set", overrides, "Override: key=value (repeatable)");
  app.add_option("--seed", seed, "Override run.seed");

  const std::vector<std::string> names = {"heteroclinic", "audit",    "minimize",
                                          "mountain-pass", "diagnose", "gamma-sweep",
                                          "spectrum"};
  for (const auto& n : names) app.add_subcommand(n);

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    anisoac::Config cfg;
    if (!config_path.empty()) cfg = anisoac::Config::from_file(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got: " + o);
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
    if (outdir.empty()) outdir = "out_" + sub;
    return anisoac::run_subcommand(sub, cfg, outdir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
