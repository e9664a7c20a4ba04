#include "landsite/selector.hpp"

#include <cmath>
#include <stdexcept>

#include "landsite/distance_transform.hpp"

namespace landsite {

FeasibilityResult inscribed_radius(const Mask& mask, double ground_sample_distance, double rho_min) {
  if (!(ground_sample_distance > 0.0)) throw std::invalid_argument("ground sample distance must be > 0");
  FeasibilityResult out;
  const Grid<double> dt = squared_distance_to_background(mask);
  for (int r = 0; r < dt.rows(); ++r) {
    for (int c = 0; c < dt.cols(); ++c) {
      if (dt(r, c) > out.max_squared_px) {
        out.max_squared_px = dt(r, c);
        out.center = {r, c};
      }
    }
  }
  out.rho = std::sqrt(out.max_squared_px) * ground_sample_distance;
  out.feasible = out.max_squared_px > 0.0 && out.rho >= rho_min;
  return out;
}

std::optional<std::size_t> select(const std::vector<SelectionCandidate>& candidates, double tau) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!c.feasible) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = candidates[*best];
    if (c.belief > b.belief || (c.belief == b.belief && (c.rho > b.rho || (c.rho == b.rho && c.track_id < b.track_id)))) {
      best = i;
    }
  }
  if (best && candidates[*best].belief >= tau) return best;
  return std::nullopt;
}

}  // namespace landsite
