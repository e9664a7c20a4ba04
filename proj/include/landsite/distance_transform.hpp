#pragma once

#include <limits>

#include "landsite/grid.hpp"

namespace landsite {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Exact squared Euclidean distance from every pixel to the nearest pixel
/// with source(r, c) != 0. Separable: a 1-D scan per row, then the lower
/// envelope of parabolas per column. Pixels with no source anywhere get
/// +inf. Values are exact integers (stored as double).
Grid<double> squared_distance_to_sources(const Mask& source);

/// Squared distance from each mask pixel to the nearest background pixel,
/// where the image is surrounded by a one-pixel background ring. Zero on
/// background pixels.
Grid<double> squared_distance_to_background(const Mask& mask);

}  // namespace landsite
