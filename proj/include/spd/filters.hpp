#pragma once

// Small image filters shared by the phantom, feature and simulation code.
// Borders are handled by reflection without repeating the edge pixel
// (index -1 maps to 1, n maps to n - 2).

#include <vector>

#include "spd/volcore.hpp"

namespace spd {

int reflect_index(int i, int n);

// Mean over the (2r+1)^2 window.
std::vector<double> box_blur(const Grid<double>& image, int radius);

// Mean of squared deviations from the window mean over the (2r+1)^2 window.
std::vector<double> local_variance(const Grid<double>& image, int radius);

// Keeps foreground pixels farther than `radius` (Euclidean) from every
// background pixel inside the image.
BinaryMask erode(const BinaryMask& mask, int radius);

// Foreground plus every pixel within `radius` of it.
BinaryMask dilate(const BinaryMask& mask, int radius);

}  // namespace spd
