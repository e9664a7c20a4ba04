#pragma once

// Landing-footprint feasibility and constrained MAP site selection.

#include <optional>
#include <vector>

#include "landsite/grid.hpp"

namespace landsite {

/// rho is the largest distance-transform value (distance from a mask pixel
/// centre to the nearest background pixel centre, image padded with
/// background) times the ground sample distance.
struct FeasibilityResult {
  double rho = 0.0;             // m
  bool feasible = false;        // rho >= rho_min
  double max_squared_px = 0.0;  // exact squared DT maximum (px^2)
  PixelIndex center;            // argmax; ties -> lowest row, then lowest column
};

FeasibilityResult inscribed_radius(const Mask& mask, double ground_sample_distance, double rho_min);

struct SelectionCandidate {
  int track_id = 0;
  double belief = 0.0;
  double rho = 0.0;
  bool feasible = false;
};

/// Index of the committed candidate: the feasible candidate with the highest
/// belief (ties: larger rho, then lower id), provided its belief >= tau.
std::optional<std::size_t> select(const std::vector<SelectionCandidate>& candidates, double tau);

struct LandingDecision {
  int track_id = 0;
  Vec3 ground_center{0, 0, 0};  // world, m
  PixelIndex center_px;
  double rho = 0.0;
  double belief = 0.0;
  int frame = 0;  // t*
};

}  // namespace landsite
