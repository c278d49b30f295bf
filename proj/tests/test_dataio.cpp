#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <map>

#include "bcpnn/dataio.hpp"
#include "support/test_util.hpp"
#include "synthdata.hpp"

using namespace bcpnn;

namespace {

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(static_cast<std::uint8_t>(x >> 24));
  v.push_back(static_cast<std::uint8_t>(x >> 16));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
  v.push_back(static_cast<std::uint8_t>(x));
}

std::vector<std::uint8_t> tiny_images(int n, int rows, int cols) {
  std::vector<std::uint8_t> v;
  push_be32(v, 0x00000803u);
  push_be32(v, static_cast<std::uint32_t>(n));
  push_be32(v, static_cast<std::uint32_t>(rows));
  push_be32(v, static_cast<std::uint32_t>(cols));
  for (int i = 0; i < n * rows * cols; ++i)
    v.push_back(static_cast<std::uint8_t>(i * 37 % 256));
  return v;
}

std::vector<std::uint8_t> tiny_labels(int n) {
  std::vector<std::uint8_t> v;
  push_be32(v, 0x00000801u);
  push_be32(v, static_cast<std::uint32_t>(n));
  for (int i = 0; i < n; ++i) v.push_back(static_cast<std::uint8_t>(i % 10));
  return v;
}

std::vector<std::uint8_t> gzip_bytes(const std::vector<std::uint8_t>& in) {
  std::vector<std::uint8_t> out(in.size() + 1024);
  z_stream zs{};
  REQUIRE(deflateInit2(&zs, Z_BEST_SPEED, Z_DEFLATED, 16 + MAX_WBITS, 8,
                       Z_DEFAULT_STRATEGY) == Z_OK);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  REQUIRE(deflate(&zs, Z_FINISH) == Z_STREAM_END);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

}  // namespace

TEST_CASE("load_idx: parses images and labels, byte 255 -> 1.0") {
  testutil::TempDir dir("idx");
  auto img = tiny_images(5, 4, 4);
  img[16] = 255;  // first pixel of first image
  img[17] = 0;
  write_bytes(dir.file("img"), img);
  write_bytes(dir.file("lab"), tiny_labels(5));
  const auto ds = load_idx(dir.file("img"), dir.file("lab"));
  CHECK(ds.size() == 5);
  CHECK(ds.width == 4);
  CHECK(ds.height == 4);
  CHECK(ds.image(0)[0] == 1.0f);
  CHECK(ds.image(0)[1] == 0.0f);
  CHECK(ds.labels[3] == 3);
  // round trip: loading twice yields identical arrays
  const auto ds2 = load_idx(dir.file("img"), dir.file("lab"));
  CHECK(ds.images == ds2.images);
  CHECK(ds.labels == ds2.labels);
}

TEST_CASE("load_idx: gzip variants detected by magic bytes") {
  testutil::TempDir dir("idxgz");
  const auto img = tiny_images(3, 2, 2);
  const auto lab = tiny_labels(3);
  write_bytes(dir.file("img.gz"), gzip_bytes(img));
  write_bytes(dir.file("lab.gz"), gzip_bytes(lab));
  write_bytes(dir.file("img"), img);
  write_bytes(dir.file("lab"), lab);
  const auto plain = load_idx(dir.file("img"), dir.file("lab"));
  const auto gz = load_idx(dir.file("img.gz"), dir.file("lab.gz"));
  CHECK(plain.images == gz.images);
  CHECK(plain.labels == gz.labels);
}

TEST_CASE("load_idx: distinct parse errors") {
  testutil::TempDir dir("idxbad");
  auto img = tiny_images(2, 2, 2);
  auto lab = tiny_labels(2);

  SUBCASE("bad image magic") {
    img[3] = 0x99;
    write_bytes(dir.file("img"), img);
    write_bytes(dir.file("lab"), lab);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("magic"), ParseError);
  }
  SUBCASE("bad label magic") {
    lab[3] = 0x99;
    write_bytes(dir.file("img"), img);
    write_bytes(dir.file("lab"), lab);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("magic"), ParseError);
  }
  SUBCASE("truncated image data") {
    img.pop_back();
    write_bytes(dir.file("img"), img);
    write_bytes(dir.file("lab"), lab);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("truncated"), ParseError);
  }
  SUBCASE("image/label count mismatch") {
    write_bytes(dir.file("img"), img);
    write_bytes(dir.file("lab"), tiny_labels(3));
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("mismatch"), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_idx(dir.file("nope"), dir.file("lab")), ParseError);
  }
}

TEST_CASE("subsample: stratified counts within 1, deterministic, disjoint") {
  synth::DigitSetParams params;
  params.n = 2000;
  params.seed = 3;
  params.width = 8;
  params.height = 8;
  const auto pool = synth::make_digits(params);

  const auto [train, test] = subsample(pool, 1000, 500, 99);
  CHECK(train.size() == 1000);
  CHECK(test.size() == 500);

  std::map<int, int> train_counts, test_counts;
  for (auto y : train.labels) ++train_counts[y];
  for (auto y : test.labels) ++test_counts[y];
  for (const auto& [cls, count] : train_counts) CHECK(count == 100);
  for (const auto& [cls, count] : test_counts) CHECK(count == 50);

  // determinism
  const auto [train2, test2] = subsample(pool, 1000, 500, 99);
  CHECK(train.images == train2.images);
  CHECK(train.labels == train2.labels);
  CHECK(test.images == test2.images);

  // disjointness: no image appears in both splits (images are unique with
  // overwhelming probability under per-sample jitter)
  auto fingerprint = [&](const ImageDataset& ds, std::size_t i) {
    double acc = 0.0;
    for (int k = 0; k < ds.n_pixels(); ++k) acc += ds.image(i)[k] * (k + 1);
    return acc;
  };
  std::map<double, int> seen;
  for (std::size_t i = 0; i < train.size(); ++i) ++seen[fingerprint(train, i)];
  for (std::size_t i = 0; i < test.size(); ++i) CHECK(seen.count(fingerprint(test, i)) == 0);
}

TEST_CASE("subsample: full-size draw returns the same content (set equality)") {
  synth::DigitSetParams params;
  params.n = 200;  // balanced: 20 per class
  params.seed = 4;
  params.width = 6;
  params.height = 6;
  const auto pool = synth::make_digits(params);
  const auto [train, test] = subsample(pool, 200, 0, 7);
  CHECK(train.size() == 200);
  CHECK(test.size() == 0);
  auto key = [&](const ImageDataset& ds, std::size_t i) {
    std::string k(reinterpret_cast<const char*>(ds.image(i)),
                  sizeof(float) * static_cast<std::size_t>(ds.n_pixels()));
    k.push_back(static_cast<char>(ds.labels[i]));
    return k;
  };
  std::multiset<std::string> a, b;
  for (std::size_t i = 0; i < pool.size(); ++i) a.insert(key(pool, i));
  for (std::size_t i = 0; i < train.size(); ++i) b.insert(key(train, i));
  CHECK(a == b);
}

TEST_CASE("subsample: insufficient samples in a class") {
  synth::DigitSetParams params;
  params.n = 55;  // classes of 5-6 samples
  params.seed = 5;
  params.width = 6;
  params.height = 6;
  const auto pool = synth::make_digits(params);
  CHECK_THROWS_WITH_AS(subsample(pool, 40, 40, 1), doctest::Contains("class"),
                       ConfigError);
  CHECK_THROWS_AS(subsample(pool, 50, 50, 1), ConfigError);  // exceeds total
}
