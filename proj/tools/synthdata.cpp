#include "synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include "bcpnn/rng.hpp"

namespace bcpnn::synth {

namespace {

struct Point {
  double x, y;
};

// Seven-segment endpoints in a normalized glyph box.
constexpr Point kTL{0.28, 0.16}, kTR{0.72, 0.16};
constexpr Point kML{0.28, 0.50}, kMR{0.72, 0.50};
constexpr Point kBL{0.28, 0.84}, kBR{0.72, 0.84};

struct Segment {
  Point a, b;
};

constexpr std::array<Segment, 7> kSegments{{
    {kTL, kTR},  // A top
    {kTR, kMR},  // B upper right
    {kMR, kBR},  // C lower right
    {kBL, kBR},  // D bottom
    {kML, kBL},  // E lower left
    {kTL, kML},  // F upper left
    {kML, kMR},  // G middle
}};

constexpr std::array<std::uint8_t, 10> kDigitSegments{{
    0b0111111,  // 0: ABCDEF
    0b0000110,  // 1: BC
    0b1011011,  // 2: ABGED
    0b1001111,  // 3: ABGCD
    0b1100110,  // 4: FGBC
    0b1101101,  // 5: AFGCD
    0b1111101,  // 6: AFGEDC
    0b0000111,  // 7: ABC
    0b1111111,  // 8
    0b1101111,  // 9: ABCDFG
}};

double dist_to_segment(double px, double py, const Segment& s) {
  const double vx = s.b.x - s.a.x, vy = s.b.y - s.a.y;
  const double wx = px - s.a.x, wy = py - s.a.y;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 > 0.0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
  const double dx = px - (s.a.x + t * vx), dy = py - (s.a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ImageDataset make_digits(const DigitSetParams& params) {
  require_config(params.n_classes >= 2 && params.n_classes <= 10,
                 "synth: n_classes must be in [2,10]");
  ImageDataset ds;
  ds.width = params.width;
  ds.height = params.height;
  ds.name = "synthetic-digits";
  const std::size_t np = static_cast<std::size_t>(params.width) * params.height;
  ds.images.resize(params.n * np);
  ds.labels.resize(params.n);

  // Near-balanced labels in a shuffled sample order.
  std::vector<std::size_t> order(params.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng::Stream order_stream(params.seed, 0x6f72646572ull);
  order_stream.shuffle(order);

  for (std::size_t rank = 0; rank < params.n; ++rank) {
    const std::size_t i = order[rank];
    const int label = static_cast<int>(rank % static_cast<std::size_t>(params.n_classes));
    ds.labels[i] = static_cast<std::uint8_t>(label);
    rng::Stream jitter(params.seed, rng::hash2(0x676c797068ull, i));

    const double theta = (jitter.next_double() - 0.5) * 0.24;
    const double scale = 0.85 + jitter.next_double() * 0.25;
    const double tx = (jitter.next_double() - 0.5) * 0.12;
    const double ty = (jitter.next_double() - 0.5) * 0.12;
    const double half_width = 0.045 + jitter.next_double() * 0.02;
    const double cosr = std::cos(theta), sinr = std::sin(theta);

    std::array<Segment, 7> segs = kSegments;
    for (auto& s : segs) {
      for (Point* p : {&s.a, &s.b}) {
        // endpoint jitter, then rotate/scale about the glyph center
        const double jx = p->x + (jitter.next_double() - 0.5) * 0.04 - 0.5;
        const double jy = p->y + (jitter.next_double() - 0.5) * 0.04 - 0.5;
        p->x = 0.5 + tx + scale * (cosr * jx - sinr * jy);
        p->y = 0.5 + ty + scale * (sinr * jx + cosr * jy);
      }
    }

    const std::uint8_t seg_mask = kDigitSegments[static_cast<std::size_t>(label)];
    float* img = ds.images.data() + i * np;
    const double aa = 0.018;  // edge softness
    for (int y = 0; y < params.height; ++y) {
      for (int x = 0; x < params.width; ++x) {
        const double pxn = (x + 0.5) / params.width;
        const double pyn = (y + 0.5) / params.height;
        double v = 0.0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
          if (!(seg_mask & (1u << s))) continue;
          const double d = dist_to_segment(pxn, pyn, segs[s]);
          const double u = std::clamp((half_width - d) / aa + 0.5, 0.0, 1.0);
          v = std::max(v, u);
        }
        const double noise = (jitter.next_double() - 0.5) * 0.06;
        img[y * params.width + x] = static_cast<float>(std::clamp(v + noise, 0.0, 1.0));
      }
    }
  }
  // Quantize like an 8-bit file would.
  for (auto& v : ds.images)
    v = std::round(v * 255.0f) / 255.0f;
  return ds;
}

namespace {

void put_be32(std::ofstream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

void write_idx(const ImageDataset& ds, const std::string& images_path,
               const std::string& labels_path) {
  {
    std::ofstream os(images_path, std::ios::binary);
    if (!os) throw ConfigError("cannot write: " + images_path);
    put_be32(os, 0x00000803u);
    put_be32(os, static_cast<std::uint32_t>(ds.size()));
    put_be32(os, static_cast<std::uint32_t>(ds.height));
    put_be32(os, static_cast<std::uint32_t>(ds.width));
    for (float v : ds.images) {
      const unsigned char byte =
          static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
      os.write(reinterpret_cast<const char*>(&byte), 1);
    }
  }
  {
    std::ofstream os(labels_path, std::ios::binary);
    if (!os) throw ConfigError("cannot write: " + labels_path);
    put_be32(os, 0x00000801u);
    put_be32(os, static_cast<std::uint32_t>(ds.size()));
    os.write(reinterpret_cast<const char*>(ds.labels.data()),
             static_cast<std::streamsize>(ds.labels.size()));
  }
}

}  // namespace bcpnn::synth
