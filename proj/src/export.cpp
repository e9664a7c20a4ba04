#include "landsite/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace landsite {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::uint8_t unit_to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

void write_frame_csv(std::ostream& os, const std::vector<FrameRecord>& rows) {
  os << kFrameCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.t << ',' << (r.phase == Phase::kScan ? "scan" : "execute");
    for (int i = 0; i < 3; ++i) os << ',' << num(r.position[i]);
    for (int i = 0; i < 3; ++i) os << ',' << num(r.velocity[i]);
    for (int i = 0; i < 3; ++i) os << ',' << num(r.command[i]);
    os << ',' << (r.hover ? 1 : 0);
    for (int i = 0; i < 3; ++i) os << ',' << num(r.guidance[i]);
    os << ',' << r.regions << ',' << r.tracks << ',' << num(r.best_belief) << ',' << r.event;
    if (r.decision) {
      const auto& d = *r.decision;
      os << ',' << d.track_id << ',' << num(d.belief) << ',' << num(d.rho) << ',' << num(d.ground_center.x()) << ','
         << num(d.ground_center.y()) << ',' << num(d.ground_center.z());
    } else {
      os << ",,,,,,";
    }
    os << '\n';
  }
}

void write_track_csv(std::ostream& os, const std::vector<TrackRecord>& rows) {
  os << kTrackCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.t << ',' << r.id << ',' << num(r.cues.flatness) << ',' << num(r.cues.slope) << ',' << num(r.cues.obstacle)
       << ',' << num(r.l1) << ',' << num(r.l0) << ',' << num(r.belief) << ',' << (r.observed ? 1 : 0) << ','
       << num(r.rho) << ',' << (r.feasible ? 1 : 0) << '\n';
  }
}

void write_servo_csv(std::ostream& os, const std::vector<ServoRecord>& rows) {
  os << kServoCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.t << ',' << r.n_features << ',' << num(r.feature.x()) << ',' << num(r.feature.y()) << ','
       << num(r.error.x()) << ',' << num(r.error.y()) << ',' << num(r.depth) << ',' << num(r.command.x()) << ','
       << num(r.command.y()) << ',' << num(r.command.z()) << ',' << (r.descending ? 1 : 0) << ','
       << (r.blind ? 1 : 0) << ',' << num(r.true_site.x()) << ',' << num(r.true_site.y()) << '\n';
  }
}

void write_result_row(std::ostream& os, const EpisodeResult& r) {
  os << r.seed << ',' << to_string(r.outcome) << ',' << opt(r.touchdown_error) << ','
     << (r.frames_to_commit ? std::to_string(*r.frames_to_commit) : std::string()) << ',' << opt(r.commit_belief)
     << ',' << num(r.max_infeasible_belief) << ',' << r.frames << ',';
  if (r.decision) {
    os << r.decision->track_id << ',' << num(r.decision->ground_center.x()) << ','
       << num(r.decision->ground_center.y()) << ',' << num(r.decision->rho);
  } else {
    os << ",,,";
  }
  os << '\n';
}

std::string summary_line(const EpisodeResult& r) {
  std::string s = "seed=" + std::to_string(r.seed) + " outcome=" + to_string(r.outcome);
  if (r.touchdown_error) s += " touchdown_error=" + num(*r.touchdown_error);
  if (r.frames_to_commit) s += " frames_to_commit=" + std::to_string(*r.frames_to_commit);
  if (r.commit_belief) s += " commit_belief=" + num(*r.commit_belief);
  s += " max_infeasible_belief=" + num(r.max_infeasible_belief);
  if (r.decision) {
    s += " site=(" + num(r.decision->ground_center.x()) + "," + num(r.decision->ground_center.y()) +
         ") rho=" + num(r.decision->rho);
  }
  s += " frames=" + std::to_string(r.frames);
  return s;
}

void write_pgm8(const std::filesystem::path& path, const Grid<std::uint8_t>& img) {
  auto os = open_binary(path);
  os << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.values().data()), static_cast<std::streamsize>(img.size()));
}

void write_pgm16(const std::filesystem::path& path, const Grid<std::uint16_t>& img) {
  auto os = open_binary(path);
  os << "P5\n" << img.cols() << ' ' << img.rows() << "\n65535\n";
  for (std::uint16_t v : img.values()) {
    const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
    os.write(bytes, 2);
  }
}

void write_frame_maps(const std::filesystem::path& dir, const FrameMaps& maps) {
  const DepthFrame& f = *maps.frame;
  const int rows = f.rows(), cols = f.cols();
  char stem[32];
  std::snprintf(stem, sizeof stem, "%05d", maps.t);
  auto name = [&](const char* kind) { return dir / (std::string(kind) + "_" + stem + ".pgm"); };

  Grid<std::uint16_t> depth(rows, cols, 0);
  Grid<std::uint8_t> intensity(rows, cols, 0), labels(rows, cols, 0), belief(rows, cols, 0), likelihood(rows, cols, 0),
      feasibility(rows, cols, 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (f.is_valid(r, c)) depth(r, c) = static_cast<std::uint16_t>(std::clamp(std::lround(f.depth(r, c) * 1000.0), 1L, 65535L));
      intensity(r, c) = unit_to_byte(f.intensity(r, c));
      const int id = maps.labels(r, c);
      labels(r, c) = id == 0 ? 0 : static_cast<std::uint8_t>(1 + (id - 1) % 255);
      belief(r, c) = unit_to_byte(maps.belief(r, c));
      likelihood(r, c) = unit_to_byte(maps.likelihood(r, c));
      feasibility(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(maps.feasibility(r, c) * 100.0), 0L, 255L));
    }
  }
  write_pgm16(name("depth"), depth);
  write_pgm8(name("intensity"), intensity);
  write_pgm8(name("labels"), labels);
  write_pgm8(name("belief"), belief);
  write_pgm8(name("likelihood"), likelihood);
  write_pgm8(name("feasibility"), feasibility);
}

}  // namespace landsite
