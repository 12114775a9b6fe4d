#pragma once

#include <limits>
#include <vector>

#include "spd/volcore.hpp"

namespace spd {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// Exact squared Euclidean distance from every pixel to the nearest
// feature pixel (mask value 1), with per-axis spacing. Separable lower
// envelope of parabolas: one pass down the columns, one along the rows.
// Pixels with no feature anywhere in the image get kInfiniteDistance.
std::vector<double> squared_distance_transform(const BinaryMask& features, double spacing_x,
                                               double spacing_y);

// Foreground pixels with a 4-neighbour that is background or outside the
// image, in row-major order.
std::vector<Pixel> extract_boundary(const BinaryMask& mask);

}  // namespace spd
