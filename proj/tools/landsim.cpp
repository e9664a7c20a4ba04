#include <iostream>

#include "CLI11.hpp"
#include "landsite/cli.hpp"

int main(int argc, char** argv) {
  using namespace landsite;
  CLI::App app{"Evidence-based landing site selection and visual-servo landing simulator"};
  RunConfig cfg;
  std::string scenario, seeds = "1", emit = "telemetry,summary";
  bool list_params = false;
  app.add_option("scenario", scenario, "scenario JSON file");
  app.add_option("--set", cfg.overrides, "parameter override symbol=value (repeatable)")->take_all();
  app.add_option("--seeds", seeds, "seed or inclusive range a..b");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--emit", emit, "comma-separated: maps,telemetry,summary");
  app.add_option("--workers", cfg.workers, "concurrent episodes in a batch");
  app.add_option("--map-stride", cfg.map_stride, "emit scan-phase maps every N frames");
  app.add_flag("--list-params", list_params, "print parameter symbols and domains");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  if (list_params) {
    const Params defaults;
    for (const auto& info : Params::describe()) {
      std::cout << info.symbol << " = " << defaults.get(info.symbol) << "  " << info.domain << "  " << info.description
                << '\n';
    }
    return 0;
  }
  if (scenario.empty()) {
    std::cerr << "config error: a scenario file is required\n";
    return kExitConfigError;
  }

  try {
    cfg.scenario = scenario;
    std::tie(cfg.seed_first, cfg.seed_last) = parse_seed_range(seeds);
    cfg.emit = parse_emit(emit);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return run(cfg, std::cout, std::cerr);
}
