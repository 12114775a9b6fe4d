#include "spd/filters.hpp"

#include "spd/distance.hpp"

namespace spd {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> box_blur(const Grid<double>& image, int radius) {
  const int w = image.width();
  const int h = image.height();
  if (radius <= 0) return {image.values().begin(), image.values().end()};
  const double inv = 1.0 / static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  std::vector<double> out(image.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = reflect_index(y + dy, h);
        for (int dx = -radius; dx <= radius; ++dx) acc += image(reflect_index(x + dx, w), yy);
      }
      out[image.index(x, y)] = acc * inv;
    }
  }
  return out;
}

std::vector<double> local_variance(const Grid<double>& image, int radius) {
  const int w = image.width();
  const int h = image.height();
  const auto mean = box_blur(image, radius);
  const double inv = 1.0 / static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  std::vector<double> out(image.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mean[image.index(x, y)];
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = reflect_index(y + dy, h);
        for (int dx = -radius; dx <= radius; ++dx) {
          const double d = image(reflect_index(x + dx, w), yy) - m;
          acc += d * d;
        }
      }
      out[image.index(x, y)] = acc * inv;
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  std::vector<std::uint8_t> background(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) background[i] = mask[i] ? 0 : 1;
  const auto d2 = squared_distance_transform(BinaryMask(mask.width(), mask.height(), std::move(background)), 1.0, 1.0);
  const double r2 = static_cast<double>(radius) * radius;
  std::vector<std::uint8_t> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] && d2[i] > r2 ? 1 : 0;
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const auto d2 = squared_distance_transform(mask, 1.0, 1.0);
  const double r2 = static_cast<double>(radius) * radius;
  std::vector<std::uint8_t> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = d2[i] <= r2 ? 1 : 0;
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

}  // namespace spd
