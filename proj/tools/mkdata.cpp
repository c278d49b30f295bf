// Generates a synthetic digit-like IDX dataset for demo and test runs where
// no real IDX corpus is on disk.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "synthdata.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic digit IDX image/label file pair"};
  std::string out_dir = "data";
  std::string prefix = "synth";
  bcpnn::synth::DigitSetParams params;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--prefix", prefix, "file name prefix");
  app.add_option("--n", params.n, "number of samples");
  app.add_option("--seed", params.seed, "generator seed");
  app.add_option("--width", params.width, "image width");
  app.add_option("--height", params.height, "image height");
  app.add_option("--classes", params.n_classes, "number of classes (2-10)");
  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto ds = bcpnn::synth::make_digits(params);
    const auto images = fs::path(out_dir) / (prefix + "-images-idx3-ubyte");
    const auto labels = fs::path(out_dir) / (prefix + "-labels-idx1-ubyte");
    bcpnn::synth::write_idx(ds, images.string(), labels.string());
    std::cout << "wrote " << ds.size() << " images to " << images.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
