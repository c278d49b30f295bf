#include "bcpnn/dataio.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "bcpnn/rng.hpp"

namespace bcpnn {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in,
                                 const std::string& path) {
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::array<std::uint8_t, 1 << 16> buf;
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw ParseError("gzip init failed: " + path);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int ret = Z_OK;
  do {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    ret = inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&zs);
      throw ParseError("gzip stream corrupt: " + path);
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  } while (ret != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_maybe_gz(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b)
    return gunzip(bytes, path);
  return bytes;
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

}  // namespace

void ImageDataset::validate() const {
  require_config(images.size() == size() * static_cast<std::size_t>(n_pixels()),
                 "dataset: image/label count mismatch");
  for (float v : images)
    require_config(v >= 0.0f && v <= 1.0f, "dataset: pixel outside [0,1]");
}

ImageDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_maybe_gz(images_path);
  if (img.size() < 16) throw ParseError("IDX image file truncated header: " + images_path);
  if (be32(img.data()) != 0x00000803u)
    throw ParseError("IDX image file bad magic (expected 0x00000803): " + images_path);
  const std::size_t n = be32(img.data() + 4);
  const std::size_t rows = be32(img.data() + 8);
  const std::size_t cols = be32(img.data() + 12);
  if (img.size() != 16 + n * rows * cols)
    throw ParseError("IDX image file truncated pixel data: " + images_path);

  const auto lab = read_maybe_gz(labels_path);
  if (lab.size() < 8) throw ParseError("IDX label file truncated header: " + labels_path);
  if (be32(lab.data()) != 0x00000801u)
    throw ParseError("IDX label file bad magic (expected 0x00000801): " + labels_path);
  const std::size_t n_lab = be32(lab.data() + 4);
  if (lab.size() != 8 + n_lab) throw ParseError("IDX label file truncated data: " + labels_path);
  if (n_lab != n)
    throw ParseError("IDX image/label count mismatch: " + images_path + " has " +
                     std::to_string(n) + " images, " + labels_path + " has " +
                     std::to_string(n_lab) + " labels");

  ImageDataset ds;
  ds.width = static_cast<int>(cols);
  ds.height = static_cast<int>(rows);
  ds.name = std::filesystem::path(images_path).stem().string();
  ds.images.resize(n * rows * cols);
  for (std::size_t i = 0; i < n * rows * cols; ++i)
    ds.images[i] = static_cast<float>(img[16 + i]) / 255.0f;
  ds.labels.assign(lab.begin() + 8, lab.end());
  return ds;
}

std::pair<ImageDataset, ImageDataset> subsample(const ImageDataset& ds,
                                                std::size_t n_train, std::size_t n_test,
                                                std::uint64_t seed) {
  require_config(n_train + n_test <= ds.size(), "subsample: not enough samples");
  std::vector<std::vector<std::size_t>> by_class(10);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  rng::Stream stream(seed, 0x73756273616d70ull);  // "subsamp"
  for (auto& idx : by_class) stream.shuffle(idx);

  // Stratify over the classes actually present in the source.
  std::vector<std::size_t> classes;
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (!by_class[c].empty()) classes.push_back(c);
  require_config(!classes.empty(), "subsample: empty dataset");

  // Per-class quotas within 1 of each other; remainder goes to the lowest
  // class indices.
  std::vector<std::size_t> cursor(by_class.size(), 0);
  auto draw = [&](std::size_t want) {
    std::vector<std::size_t> out;
    out.reserve(want);
    const std::size_t base = want / classes.size();
    const std::size_t extra = want % classes.size();
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      const std::size_t c = classes[ci];
      const std::size_t quota = base + (ci < extra ? 1 : 0);
      if (by_class[c].size() - cursor[c] < quota)
        throw ConfigError("subsample: insufficient samples in class " +
                          std::to_string(c));
      for (std::size_t t = 0; t < quota; ++t)
        out.push_back(by_class[c][cursor[c]++]);
    }
    return out;
  };
  auto pick_train = draw(n_train);
  auto pick_test = draw(n_test);

  auto gather = [&](const std::vector<std::size_t>& pick, const char* suffix) {
    ImageDataset out;
    out.width = ds.width;
    out.height = ds.height;
    out.name = ds.name + suffix;
    const std::size_t np = static_cast<std::size_t>(ds.n_pixels());
    out.images.resize(pick.size() * np);
    out.labels.resize(pick.size());
    for (std::size_t r = 0; r < pick.size(); ++r) {
      std::memcpy(out.images.data() + r * np, ds.image(pick[r]), np * sizeof(float));
      out.labels[r] = ds.labels[pick[r]];
    }
    return out;
  };
  return {gather(pick_train, "-train"), gather(pick_test, "-test")};
}

}  // namespace bcpnn
