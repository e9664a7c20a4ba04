#include "landsite/cli.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include "landsite/export.hpp"

namespace landsite {
namespace {

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("seeds", "seed '" + s + "' is not a non-negative integer");
  }
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = parse_u64(text);
    return {v, v};
  }
  const auto a = parse_u64(text.substr(0, dots));
  const auto b = parse_u64(text.substr(dots + 2));
  if (b < a) throw ConfigError("seeds", "seed range '" + text + "' is empty");
  return {a, b};
}

Emit parse_emit(const std::string& text) {
  Emit e{false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "maps") e.maps = true;
    else if (item == "telemetry") e.telemetry = true;
    else if (item == "summary") e.summary = true;
    else if (!item.empty()) throw ConfigError("emit", "unknown emission '" + item + "' (expected maps, telemetry, summary)");
  }
  return e;
}

int exit_code(Outcome outcome) {
  switch (outcome) {
    case Outcome::kLanded: return kExitLanded;
    case Outcome::kAborted: return kExitAborted;
    case Outcome::kTimeout: return kExitTimeout;
  }
  return kExitTimeout;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  Params params;
  try {
    scenario = load_scenario(config.scenario);
    params = scenario_params(scenario);
    apply_overrides(params, config.overrides);
    params.validate();
    if (config.workers < 1) throw ConfigError("workers", "--workers must be >= 1");
    if (config.seed_last < config.seed_first) throw ConfigError("seeds", "seed range is empty");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const World world = build_world(scenario.world);
  const std::size_t n = static_cast<std::size_t>(config.seed_last - config.seed_first + 1);
  const bool write_files = !config.out_dir.empty();
  std::vector<EpisodeResult> results(n);
  std::vector<std::string> failures(n);

  try {
    if (write_files) std::filesystem::create_directories(config.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  }

  auto episode = [&](std::size_t i) {
    const std::uint64_t seed = config.seed_first + i;
    const std::filesystem::path dir = config.out_dir / ("seed_" + std::to_string(seed));
    try {
      EpisodeOptions opts;
      opts.record_telemetry = write_files && config.emit.telemetry;
      opts.map_stride = config.map_stride;
      if (write_files) std::filesystem::create_directories(dir);
      if (write_files && config.emit.maps) {
        std::filesystem::create_directories(dir / "maps");
        opts.on_maps = [&](const FrameMaps& m) { write_frame_maps(dir / "maps", m); };
      }
      EpisodeOutput eo = run_episode(world, scenario, params, seed, opts);
      if (write_files && config.emit.telemetry) {
        std::ostringstream f, t, s;
        write_frame_csv(f, eo.telemetry.frames);
        write_track_csv(t, eo.telemetry.tracks);
        write_servo_csv(s, eo.telemetry.servo);
        write_text(dir / "telemetry.csv", f.str());
        write_text(dir / "tracks.csv", t.str());
        write_text(dir / "servo.csv", s.str());
      }
      if (write_files && config.emit.summary) write_text(dir / "summary.txt", summary_line(eo.result) + "\n");
      results[i] = eo.result;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };

  const int workers = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(config.workers)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) episode(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) episode(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      err << "error: seed " << config.seed_first + i << ": " << failures[i] << '\n';
      return kExitIoError;
    }
  }

  if (config.emit.summary) {
    for (const auto& r : results) out << summary_line(r) << '\n';
  }
  if (write_files) {
    std::ostringstream agg;
    agg << kResultCsvHeader << '\n';
    for (const auto& r : results) write_result_row(agg, r);
    try {
      write_text(config.out_dir / "results.csv", agg.str());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitIoError;
    }
  }

  bool any_aborted = false, any_timeout = false;
  for (const auto& r : results) {
    any_aborted |= r.outcome == Outcome::kAborted;
    any_timeout |= r.outcome == Outcome::kTimeout;
  }
  if (any_aborted) return kExitAborted;
  if (any_timeout) return kExitTimeout;
  return kExitLanded;
}

}  // namespace landsite
