#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bcpnn/common.hpp"

namespace bcpnn {

/// Images flattened row-major to [0,1] floats, one label in [0,9] per image.
struct ImageDataset {
  std::vector<float> images;  // n * n_pixels
  std::vector<std::uint8_t> labels;
  int width = 0;
  int height = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  int n_pixels() const { return width * height; }
  const float* image(std::size_t i) const { return images.data() + i * n_pixels(); }
  void validate() const;
};

/// Parse a big-endian IDX image/label file pair (magics 0x803 / 0x801).
/// Pixels are divided by 255. Gzip-compressed files are detected by their
/// magic bytes and inflated transparently.
ImageDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Seeded stratified sampling without replacement: n_train + n_test disjoint
/// samples with near-equal class counts (difference at most 1 within each
/// returned split).
std::pair<ImageDataset, ImageDataset> subsample(const ImageDataset& ds,
                                                std::size_t n_train,
                                                std::size_t n_test,
                                                std::uint64_t seed);

}  // namespace bcpnn
