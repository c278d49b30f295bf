#pragma once

#include <cstdint>
#include <string>

#include "bcpnn/dataio.hpp"

namespace bcpnn::synth {

struct DigitSetParams {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  int width = 28;
  int height = 28;
  int n_classes = 10;
};

/// Deterministic stroke-rendered digit-like glyphs (seven-segment layout with
/// affine jitter, stroke-width variation and pixel noise). A stand-in corpus
/// for pipeline runs when no IDX dataset is available.
ImageDataset make_digits(const DigitSetParams& params);

/// Write a dataset as a big-endian IDX image/label file pair.
void write_idx(const ImageDataset& ds, const std::string& images_path,
               const std::string& labels_path);

}  // namespace bcpnn::synth
