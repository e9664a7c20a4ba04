#pragma once

// CSV and PGM writers for episode telemetry and per-frame rasters.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "landsite/simloop.hpp"

namespace landsite {

inline constexpr const char* kFrameCsvHeader =
    "t,phase,x,y,z,vx,vy,vz,cmd_x,cmd_y,cmd_z,hover,guide_x,guide_y,guide_z,regions,tracks,best_belief,event,"
    "decision_track,decision_belief,decision_rho,decision_x,decision_y,decision_z";
inline constexpr const char* kTrackCsvHeader = "t,id,f,s,o,L1,L0,b,observed,rho,feasible";
inline constexpr const char* kServoCsvHeader = "t,N_t,s_u,s_v,e_u,e_v,Z,v_x,v_y,v_z,descending,blind,true_u,true_v";
inline constexpr const char* kResultCsvHeader =
    "seed,outcome,touchdown_error,frames_to_commit,commit_belief,max_infeasible_belief,frames,site_track,site_x,site_y,"
    "site_rho";

void write_frame_csv(std::ostream& os, const std::vector<FrameRecord>& rows);
void write_track_csv(std::ostream& os, const std::vector<TrackRecord>& rows);
void write_servo_csv(std::ostream& os, const std::vector<ServoRecord>& rows);
void write_result_row(std::ostream& os, const EpisodeResult& r);

/// One-line human-readable result, e.g. "seed=3 outcome=landed ...".
std::string summary_line(const EpisodeResult& r);

/// Binary PGM (P5). 16-bit samples are written big-endian.
void write_pgm8(const std::filesystem::path& path, const Grid<std::uint8_t>& img);
void write_pgm16(const std::filesystem::path& path, const Grid<std::uint16_t>& img);

/// Writes depth_<t>.pgm (mm, 0 = no return), intensity, labels, belief,
/// likelihood and feasibility (rho in cm) rasters into `dir`.
void write_frame_maps(const std::filesystem::path& dir, const FrameMaps& maps);

}  // namespace landsite
